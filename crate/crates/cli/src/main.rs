use std::fmt::Display;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use topocalc::corpus::{self, BoundReport};
use topocalc::decomposition::{self as decomp, DecompGraph};
use topocalc::forms;
use topocalc::kirby::{KirbyDiagram, SphereData};
use topocalc::seifert::{self, SeifertBlock};
use topocalc::shadow::{self, SpecialShadow};
use topocalc::slope::{self, Mat2, Slope, SlopeVector};

#[derive(Parser)]
#[command(name = "topocalc", version, about = "Exact calculators for 3- and 4-manifold invariants")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Input file (default: stdin).
    #[arg(short, long, global = true)]
    input: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest diagram weight for corpus runs.
    #[arg(long, global = true, default_value_t = 12)]
    max_weight: usize,
    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Slope distance and annulus twists.
    Slope {
        #[command(subcommand)]
        op: SlopeOp,
    },
    /// Seifert block invariants and Dehn filling.
    Seifert {
        #[command(subcommand)]
        op: SeifertOp,
    },
    /// Geometric decomposition graphs.
    Decomp {
        #[command(subcommand)]
        op: DecompOp,
    },
    /// Kirby diagrams.
    Kirby {
        #[command(subcommand)]
        op: KirbyOp,
    },
    /// Special shadows.
    Shadow {
        #[command(subcommand)]
        op: ShadowOp,
    },
    /// Unimodular intersection forms.
    Forms {
        #[command(subcommand)]
        op: FormsOp,
    },
    /// Generated corpora and bound checks.
    Corpus {
        #[command(subcommand)]
        op: CorpusOp,
    },
}

#[derive(Subcommand)]
enum SlopeOp {
    /// `{"a": "q/p", "b": "q/p"}` → distance.
    Dist,
    /// `{"slopes": [...], "i": 0, "j": 1, "sign": 1}` → twisted slopes.
    Twist,
}

#[derive(Subcommand)]
enum SeifertOp {
    /// Orbifold Euler characteristic of a block.
    Chi,
    /// Euler number of a block.
    Euler,
    /// `{"block": ..., "slopes": [...], "allow_fiber": false}` → filled manifold.
    Fill,
}

#[derive(Subcommand)]
enum DecompOp {
    Validate,
    Vol,
    Euler,
    /// `{"monodromy": [[a, b], [c, d]]}` → e of the Sol torus bundle.
    SolE,
    /// Elements of the volume set below a bound (no input).
    VolsEnum {
        #[arg(long, default_value = "1")]
        bound: Ratio<i64>,
        #[arg(long, default_value_t = 24)]
        max_order: i64,
    },
}

#[derive(Subcommand)]
enum KirbyOp {
    Weight,
    Connect,
    /// `{"diagram": ..., "spheres": [{"components": [...]}]}`.
    Slide,
    Double,
    Form,
}

#[derive(Subcommand)]
enum ShadowOp {
    Check,
    FromKirby {
        /// Connect the diagram first.
        #[arg(long)]
        connect: bool,
    },
    /// Shadow, or `{"shadow": ..., "cuts": [...]}`; cuts default to a BFS cut system.
    ToKirby,
}

#[derive(Subcommand)]
enum FormsOp {
    /// A symmetric integer matrix, bare or as `{"matrix": ...}`.
    Classify,
    Count {
        #[arg(long)]
        rank: u64,
    },
    Bounds {
        #[arg(long)]
        rank: u64,
    },
}

#[derive(Subcommand)]
enum CorpusOp {
    Generate {
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    Run,
}

enum Failure {
    Schema(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Schema(_) => 3,
        }
    }
}

fn invalid(e: impl Display) -> Failure {
    Failure::Validation(e.to_string())
}

struct Io {
    input: Option<PathBuf>,
}

impl Io {
    fn read<T: DeserializeOwned>(&self) -> Result<T, Failure> {
        let mut text = String::new();
        match &self.input {
            Some(p) => text = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
            None => {
                std::io::stdin().read_to_string(&mut text).map_err(invalid)?;
            }
        }
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Failure::Schema(format!("schema error at {path}: {}", e.into_inner()))
        })
    }
}

#[derive(Deserialize)]
struct DistInput {
    a: Slope,
    b: Slope,
}

#[derive(Deserialize)]
struct TwistInput {
    slopes: SlopeVector,
    i: usize,
    j: usize,
    sign: i64,
}

#[derive(Deserialize)]
struct FillInput {
    block: SeifertBlock,
    slopes: Vec<Option<Slope>>,
    #[serde(default)]
    allow_fiber: bool,
}

#[derive(Deserialize)]
struct SolInput {
    monodromy: Mat2,
}

#[derive(Deserialize)]
struct SlideInput {
    diagram: KirbyDiagram,
    spheres: Vec<SphereData>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ToKirbyInput {
    WithCuts { shadow: SpecialShadow, cuts: Vec<usize> },
    Bare(SpecialShadow),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Wrapped { matrix: Vec<Vec<i64>> },
    Bare(Vec<Vec<i64>>),
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("outputs serialize")
}

fn pool() -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(w) = std::env::var("TOPOCALC_WORKERS") {
        let n: usize = w.parse().map_err(|_| invalid(format!("TOPOCALC_WORKERS must be a positive integer, got {w:?}")))?;
        if n == 0 {
            return Err(invalid("TOPOCALC_WORKERS must be positive"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(invalid)
}

fn dispatch(cli: &Cli) -> Result<Value, Failure> {
    let io = Io { input: cli.input.clone() };
    Ok(match &cli.cmd {
        Cmd::Slope { op } => match op {
            SlopeOp::Dist => {
                let x: DistInput = io.read()?;
                json!({ "distance": slope::distance(x.a, x.b) })
            }
            SlopeOp::Twist => {
                let x: TwistInput = io.read()?;
                json!({ "slopes": slope::annulus_twist(&x.slopes, x.i, x.j, x.sign).map_err(invalid)? })
            }
        },
        Cmd::Seifert { op } => match op {
            SeifertOp::Chi => {
                let b: SeifertBlock = io.read()?;
                json!({ "chi": seifert::chi_orbifold(&b).to_string() })
            }
            SeifertOp::Euler => {
                let b: SeifertBlock = io.read()?;
                json!({ "euler": seifert::euler_number(&b).map_err(invalid)?.to_string(), "closed": b.is_closed() })
            }
            SeifertOp::Fill => {
                let x: FillInput = io.read()?;
                let r = if x.slopes.iter().all(Option::is_some) {
                    let v = SlopeVector(x.slopes.iter().flatten().copied().collect());
                    seifert::fill(&x.block, &v, x.allow_fiber)
                } else {
                    seifert::fill_partial(&x.block, &x.slopes, x.allow_fiber)
                }
                .map_err(invalid)?;
                let pi1 = seifert::pi1_order(&r).ok();
                json!({ "result": r, "pi1_order": pi1 })
            }
        },
        Cmd::Decomp { op } => match op {
            DecompOp::Validate => {
                let g: DecompGraph = io.read()?;
                to_value(&decomp::validate_geometric(&g).map_err(invalid)?)
            }
            DecompOp::Vol => {
                let g: DecompGraph = io.read()?;
                json!({ "volume": decomp::volume(&g).map_err(invalid)? })
            }
            DecompOp::Euler => {
                let g: DecompGraph = io.read()?;
                json!({ "euler": decomp::euler_invariant(&g).map_err(invalid)?, "delta_max": decomp::delta_max(&g).map_err(invalid)? })
            }
            DecompOp::SolE => {
                let x: SolInput = io.read()?;
                json!({ "e": decomp::sol_torus_bundle_e(&x.monodromy).map_err(invalid)? })
            }
            DecompOp::VolsEnum { bound, max_order } => {
                let els = decomp::vol_s_enumerate(*bound, *max_order).map_err(invalid)?;
                let rows: Vec<Value> = els
                    .iter()
                    .map(|e| json!({ "value": e.value.to_string(), "n": e.n, "orders": e.orders }))
                    .collect();
                json!({ "bound": bound.to_string(), "max_order": max_order, "count": rows.len(), "elements": rows })
            }
        },
        Cmd::Kirby { op } => match op {
            KirbyOp::Weight => {
                let d: KirbyDiagram = io.read()?;
                json!({
                    "weight": d.weight(),
                    "crossings": d.crossings().len(),
                    "discs": 2 * d.disc_pairs().len(),
                    "strands": d.strands().len(),
                })
            }
            KirbyOp::Connect => to_value(&io.read::<KirbyDiagram>()?.connect()),
            KirbyOp::Slide => {
                let x: SlideInput = io.read()?;
                to_value(&x.diagram.slide_normalize_framings(&x.spheres).map_err(invalid)?)
            }
            KirbyOp::Double => to_value(&io.read::<KirbyDiagram>()?.double()),
            KirbyOp::Form => {
                let f = io.read::<KirbyDiagram>()?.intersection_form().map_err(invalid)?;
                let mut v = to_value(&f);
                v["manifold"] = to_value(&f.manifold_name());
                v
            }
        },
        Cmd::Shadow { op } => match op {
            ShadowOp::Check => {
                let s: SpecialShadow = io.read()?;
                let r = s.is_special().map_err(invalid)?;
                json!({ "special": r.special, "violations": r.violations, "vertices": s.vertex_count() })
            }
            ShadowOp::FromKirby { connect } => {
                let mut d: KirbyDiagram = io.read()?;
                if *connect {
                    d = d.connect();
                }
                to_value(&shadow::from_kirby(&d).map_err(invalid)?)
            }
            ShadowOp::ToKirby => {
                let (s, cuts) = match io.read::<ToKirbyInput>()? {
                    ToKirbyInput::WithCuts { shadow, cuts } => (shadow, shadow::CutSystem { cut_edges: cuts }),
                    ToKirbyInput::Bare(s) => {
                        let c = shadow::find_cut_system(&s).map_err(invalid)?;
                        (s, c)
                    }
                };
                let d = shadow::to_kirby(&s, &cuts).map_err(invalid)?;
                json!({ "cuts": cuts.cut_edges, "weight": d.weight(), "diagram": d })
            }
        },
        Cmd::Forms { op } => match op {
            FormsOp::Classify => {
                let m = match io.read::<MatrixInput>()? {
                    MatrixInput::Wrapped { matrix } | MatrixInput::Bare(matrix) => matrix,
                };
                let f = forms::classify(&m).map_err(invalid)?;
                let mut v = to_value(&f);
                v["manifold"] = to_value(&f.manifold_name());
                v
            }
            FormsOp::Count { rank } => to_value(&forms::count_forms(*rank).map_err(invalid)?),
            FormsOp::Bounds { rank } => {
                let up = forms::count_un_homeo_bound(*rank).map_err(invalid)?;
                let low = forms::count_simply_connected_lower(*rank).map_err(invalid)?;
                let n2 = (*rank as f64).powi(2);
                json!({
                    "rank": rank,
                    "homeo_bound": up,
                    "homeo_bound_over_n2": up as f64 / n2,
                    "simply_connected_lower": low,
                    "lower_over_n2": low as f64 / n2,
                })
            }
        },
        Cmd::Corpus { op } => {
            let pool = pool()?;
            match op {
                CorpusOp::Generate { count } => {
                    let diagrams = corpus::diagram_corpus(cli.seed, cli.max_weight, *count);
                    let shadows = corpus::shadow_corpus(cli.seed, corpus::MAX_SHADOW_VERTICES, *count);
                    json!({ "seed": cli.seed, "max_weight": cli.max_weight, "diagrams": diagrams, "shadows": shadows })
                }
                CorpusOp::Run => {
                    let diagrams = corpus::diagram_corpus(cli.seed, cli.max_weight, corpus::DIAGRAMS);
                    let shadows = corpus::shadow_corpus(cli.seed, corpus::MAX_SHADOW_VERTICES, corpus::SHADOWS);
                    let outcomes: Vec<Vec<corpus::Outcome>> = pool.install(|| {
                        let mut a: Vec<_> = diagrams.par_iter().map(corpus::check_diagram).collect();
                        a.extend(shadows.par_iter().map(corpus::check_shadow).collect::<Vec<_>>());
                        a
                    });
                    let report = BoundReport::from_outcomes(outcomes.into_iter().flatten());
                    json!({
                        "seed": cli.seed,
                        "max_weight": cli.max_weight,
                        "diagrams": diagrams.len(),
                        "shadows": shadows.len(),
                        "violations": report.violations(),
                        "rows": report.rows,
                    })
                }
            }
        }
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Objects become key/value lines; arrays of objects become column tables.
fn table(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
            let mut nested = Vec::new();
            for (k, x) in map {
                match x {
                    Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => nested.push((k, x)),
                    Value::Object(_) => nested.push((k, x)),
                    _ => out.push_str(&format!("{k:<width$}  {}\n", scalar(x))),
                }
            }
            for (k, x) in nested {
                out.push_str(&format!("\n[{k}]\n{}", table(x)));
            }
        }
        Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
            let mut cols: Vec<String> = Vec::new();
            for it in items {
                for k in it.as_object().unwrap().keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            let cells: Vec<Vec<String>> =
                items.iter().map(|it| cols.iter().map(|c| it.get(c).map_or("-".into(), scalar)).collect()).collect();
            let widths: Vec<usize> = cols
                .iter()
                .enumerate()
                .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.chars().count()]).max().unwrap())
                .collect();
            let line = |r: &[String]| {
                r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect::<Vec<_>>().join(" | ").trim_end().to_string()
            };
            out.push_str(&line(&cols));
            out.push('\n');
            out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
            out.push('\n');
            for r in &cells {
                out.push_str(&line(r));
                out.push('\n');
            }
        }
        other => {
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(&cli).and_then(|v| {
        let text = match cli.format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&v).expect("json")),
            Format::Table => table(&v),
        };
        match &cli.output {
            Some(p) => std::fs::write(p, text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(invalid),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Schema(m) | Failure::Validation(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
