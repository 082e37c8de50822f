//! Sampled paths and fields, partitions, test functions and mollifiers.

mod field;
pub mod io;
mod mollifier;
mod partition;
mod path;
mod testfn;

pub use field::SampledField;
pub use mollifier::{
    bump, mollify_1d, mollify_1d_path, mollify_2d, Func1, Func2, Mollified1D, Mollified2D, MollifierSpec,
    DEFAULT_NODES,
};
pub use partition::{Partition1D, Partition2D};
pub use path::{Meta, SampledPath};
pub use testfn::{make_test_function, Grid, Sampled, TestFunction};
