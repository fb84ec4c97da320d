//! Two-piece scale-mixture-of-normal distributions.

mod baseline;
mod twopiece;

pub use baseline::{Baseline, BaselineKind};
pub use twopiece::{
    ab, tp_cdf, tp_logpdf, tp_median, tp_quantile, tp_sample, SkewParameterisation, TwoPiece,
    TwoPieceParams,
};
