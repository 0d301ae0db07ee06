//! Zero-density counts of polynomial congruences, and desk-scale statistics
//! for square-full divisors of `F^∨(c)` and for bad-modulus sums.

mod roots;
mod stats;

pub use roots::{
    dual_root_count, multivariate_root_count, root_count_trend, univariate_root_count,
    zero_density_check, IntPoly, MultiPoly, RootMethod, ZeroDensityRow,
};
pub use stats::{
    b3_second_moment, default_squarefull_grid, squarefull_in_window, squarefull_stats, B3Report,
    B3Row, SampleMode, SquarefullReport, SquarefullRow, DEFAULT_B3_GRID,
};
