pub mod slope;
pub mod seifert;
pub mod decomposition;
pub mod forms;
pub mod kirby;
pub mod shadow;
pub mod corpus;
