pub mod agents;
pub mod curriculum;
pub mod de;
pub mod game;
pub mod levelgen;
pub mod observation;
pub mod poet;
pub mod policy;
pub mod render;
pub mod rundir;
pub mod rng;
pub mod seeds;

/// Size the global evaluation pool. Call before any parallel work; `0`
/// keeps the default of one worker per available core.
pub fn init_workers(n: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()
}
