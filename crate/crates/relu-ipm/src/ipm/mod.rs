//! Discriminator families, IPM estimators, exact low-dimensional oracles,
//! and closed-form kernel MMDs.

mod discriminator;
mod estimate;
mod kernel;
mod oracle;
mod sample;

pub use discriminator::{
    mean_gap, relu_disc_eval, sigmoid, DiscParams, HolderNetParams, ReluParams, SigmoidParams,
};
pub(crate) use discriminator::{DiscFamily, HolderFamily, ReluFamily, SigmoidFamily};
pub use estimate::{
    estimate_holder_nn_ipm, estimate_relu_ipm, estimate_sigmoid_ipm, EstimatorConfig, IpmResult,
};
pub use kernel::{kernel_eval, mmd_squared, KernelSpec};
pub use oracle::{exact_relu_ipm_1d, grid_relu_ipm};
pub use sample::{NormalizationMap, SampleSet};
