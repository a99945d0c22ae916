//! Thresholds shared by module checks and the acceptance suite.

pub const HILBERT_PAIR: f64 = 1e-8;
pub const HILBERT_NULL: f64 = 1e-10;
pub const TRICOMI_ROUND_TRIP: f64 = 1e-8;
pub const RANGE_DEFECT: f64 = 1e-8;
pub const PSEUDOINVERSE_RESIDUAL: f64 = 1e-8;

pub const BOUND_SLACK: f64 = 1e-12;
pub const FACTORIZATION: f64 = 1e-12;
pub const SPLIT_FORM: f64 = 1e-14;
pub const MULTIPLIER_FLOOR: f64 = 1e-14;

pub const POSSIO_RESIDUAL: f64 = 1e-6;
pub const POSSIO_PATH_AGREEMENT: f64 = 1e-6;
pub const TSVD_CUTOFF: f64 = 1e-10;
pub const TRACE_RATIO_CHANGE: f64 = 0.25;
pub const SOBOLEV_EPSILON: f64 = 0.05;

pub const DUALITY_DECAY: f64 = 1.8;
pub const RESOLVENT_STABILITY: f64 = 2.0;

pub const GRADIENT_STEP: f64 = 1e-5;
pub const GRADIENT_LOCAL: f64 = 1e-6;
pub const GRADIENT_VON_KARMAN: f64 = 1e-5;

pub const ENERGY_DRIFT: f64 = 1e-6;
pub const ORDER_TWO_BAND: f64 = 0.2;
pub const PICARD_SQRT_FACTOR: f64 = 1.5;
pub const PICARD_MATCH: f64 = 1e-5;
pub const ADMISSIBILITY_STABILITY: f64 = 2.0;

pub const NONLINEAR_MAX_ITERS: usize = 50;
pub const NONLINEAR_TOL: f64 = 1e-10;
