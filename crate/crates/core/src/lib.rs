pub mod buffer;
pub mod dataio;
pub mod dimest;
pub mod model;
pub mod numcore;
pub mod sketch;
pub mod trainer;
