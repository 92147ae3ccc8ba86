pub mod density;
pub mod levy;
pub mod operator;
pub mod quad;
pub mod sampling;
pub mod scaling;
pub mod special;
pub mod stable;
pub use num_complex;
