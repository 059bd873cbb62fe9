pub mod decode;
pub mod evaluate;
pub mod gradcheck;
pub mod possel;
pub mod preprocess;
pub mod retrieve;
pub mod terms;
pub mod train;
pub mod vocab;
