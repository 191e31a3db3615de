pub mod estimator;
pub mod ledger;
pub mod llm;
pub mod mission;
pub mod motion;
pub mod planner;
pub mod scenario;
pub mod scene;
pub mod world;
