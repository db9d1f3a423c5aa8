//! Shared fixtures for the integration suites: published reference grids for
//! the fixed- and floating-strike tables, and a cached computation of the
//! full grids with the production settings.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use vheston::{
    default_steps, Kernel, ModelParams, OptionKind, PricingSession, QuadratureSpec, StatePath,
};

pub const ALPHAS: [f64; 3] = [1.00, 0.75, 0.60];
pub const MATURITIES: [f64; 9] = [0.2, 0.4, 0.5, 1.0, 1.5, 2.0, 3.0, 8.0, 12.0];
pub const STRIKES: [f64; 5] = [90.0, 95.0, 100.0, 105.0, 110.0];

/// Fixed-strike reference grid: (T, K, call values, put values), each value
/// triple ordered by `ALPHAS`.
#[rustfmt::skip]
pub const FIXED_TABLE: [(f64, f64, [f64; 3], [f64; 3]); 45] = [
    (0.2,  90.0, [10.6571, 10.8151, 10.9546], [ 0.4526,  0.6424,  0.8061]),
    (0.2,  95.0, [ 6.5871,  6.7931,  6.9556], [ 1.3329,  1.5705,  1.7575]),
    (0.2, 100.0, [ 3.4478,  3.6182,  3.7484], [ 3.1438,  3.3459,  3.5005]),
    (0.2, 105.0, [ 1.4552,  1.5338,  1.5976], [ 6.1014,  6.2118,  6.3000]),
    (0.2, 110.0, [ 0.4724,  0.4841,  0.5016], [10.0689, 10.1124, 10.1542]),
    (0.4,  90.0, [11.7112, 11.9773, 12.1707], [ 1.3799,  1.7123,  1.9469]),
    (0.4,  95.0, [ 8.0894,  8.3894,  8.5983], [ 2.6591,  3.0254,  3.2755]),
    (0.4, 100.0, [ 5.1616,  5.4415,  5.6345], [ 4.6323,  4.9785,  5.2128]),
    (0.4, 105.0, [ 3.0018,  3.2178,  3.3695], [ 7.3735,  7.6558,  7.8489]),
    (0.4, 110.0, [ 1.5715,  1.7089,  1.8103], [10.8442, 11.0478, 11.1906]),
    (0.5,  90.0, [12.2329, 12.5314, 12.7380], [ 1.8619,  2.2389,  2.4909]),
    (0.5,  95.0, [ 8.7553,  9.0844,  9.3050], [ 3.2609,  3.6685,  3.9345]),
    (0.5, 100.0, [ 5.8971,  6.2119,  6.4211], [ 5.2792,  5.6726,  5.9273]),
    (0.5, 105.0, [ 3.7072,  3.9697,  4.1460], [ 7.9659,  8.3069,  8.5288]),
    (0.5, 110.0, [ 2.1589,  2.3501,  2.4823], [11.2941, 11.5638, 11.7417]),
    (1.0,  90.0, [14.5779, 14.9390, 15.1588], [ 4.1801,  4.6239,  4.8798]),
    (1.0,  95.0, [11.5551, 11.9353, 12.1637], [ 5.9135,  6.3763,  6.6408]),
    (1.0, 100.0, [ 8.9457,  9.3239,  9.5499], [ 8.0602,  8.5211,  8.7830]),
    (1.0, 105.0, [ 6.7559,  7.1130,  7.3263], [10.6266, 11.0663, 11.3155]),
    (1.0, 110.0, [ 4.9723,  5.2932,  5.4859], [13.5991, 14.0027, 14.2312]),
    (1.5,  90.0, [16.5030, 16.8533, 17.0544], [ 6.2606,  6.6283,  6.8267]),
    (1.5,  95.0, [13.7625, 14.1213, 14.3261], [ 8.1588,  8.5350,  8.7371]),
    (1.5, 100.0, [11.3374, 11.6939, 11.8969], [10.3725, 10.7464, 10.9465]),
    (1.5, 105.0, [ 9.2245,  9.5687,  9.7647], [12.8983, 13.2599, 13.4529]),
    (1.5, 110.0, [ 7.4122,  7.7358,  7.9205], [15.7246, 16.0658, 16.2473]),
    (2.0,  90.0, [18.0914, 18.4083, 18.5845], [ 8.0965,  8.3323,  8.4548]),
    (2.0,  95.0, [15.5640, 15.8803, 16.0558], [10.0933, 10.3285, 10.4502]),
    (2.0, 100.0, [13.2933, 13.6034, 13.7755], [12.3467, 12.5758, 12.6939]),
    (2.0, 105.0, [11.2728, 11.5719, 11.7379], [14.8504, 15.0684, 15.1804]),
    (2.0, 110.0, [ 9.4921,  9.7761,  9.9339], [17.5939, 17.7968, 17.9005]),
    (3.0,  90.0, [20.5102, 20.7529, 20.8857], [11.1123, 11.0617, 11.0298]),
    (3.0,  95.0, [18.3060, 18.5346, 18.6598], [13.2116, 13.1469, 13.1073]),
    (3.0, 100.0, [16.2895, 16.5034, 16.6208], [15.4986, 15.4193, 15.3717]),
    (3.0, 105.0, [14.4531, 14.6523, 14.7617], [17.9658, 17.8716, 17.8159]),
    (3.0, 110.0, [12.7882, 12.9725, 13.0740], [20.6044, 20.4954, 20.4316]),
    (8.0,  90.0, [24.7980, 24.9009, 24.9967], [18.0809, 17.3813, 16.9256]),
    (8.0,  95.0, [23.4852, 23.5573, 23.6319], [20.1198, 19.3894, 18.9125]),
    (8.0, 100.0, [22.2483, 22.2920, 22.3471], [22.2345, 21.4757, 20.9792]),
    (8.0, 105.0, [21.0827, 21.1003, 21.1374], [24.4204, 23.6356, 23.1211]),
    (8.0, 110.0, [19.9840, 19.9778, 19.9983], [26.6733, 25.8646, 25.3336]),
    (12.0,  90.0, [24.1840, 24.3052, 24.4514], [18.9998, 18.2823, 17.7561]),
    (12.0,  95.0, [23.2584, 23.3520, 23.4766], [20.8183, 20.0731, 19.5254]),
    (12.0, 100.0, [22.3795, 22.4472, 22.5516], [22.6834, 21.9124, 21.3445]),
    (12.0, 105.0, [21.5442, 21.5878, 21.6734], [24.5922, 23.7971, 23.2103]),
    (12.0, 110.0, [20.7498, 20.7710, 20.8388], [26.5418, 25.7243, 25.1198]),
];

/// Floating-strike reference grid: (T, call values, put values) by `ALPHAS`.
#[rustfmt::skip]
pub const FLOAT_TABLE: [(f64, [f64; 3], [f64; 3]); 9] = [
    ( 0.2, [ 3.9925,  4.2467,  4.3812], [ 3.3015,  3.5240,  3.6341]),
    ( 0.4, [ 6.4473,  6.7508,  6.8805], [ 4.9965,  5.2336,  5.3222]),
    ( 0.5, [ 7.5727,  7.8563,  7.9658], [ 5.7216,  5.9267,  5.9908]),
    ( 1.0, [12.5761, 12.5965, 12.5621], [ 8.5845,  8.5222,  8.4516]),
    ( 1.5, [16.8305, 16.5500, 16.3745], [10.5698, 10.2720, 10.0988]),
    ( 2.0, [20.5478, 20.0250, 19.7323], [11.9781, 11.5364, 11.2964]),
    ( 3.0, [26.8612, 26.0414, 25.5759], [13.7228, 13.1961, 12.8935]),
    ( 8.0, [48.0585, 47.0888, 46.3269], [15.1044, 14.9363, 14.7224]),
    (12.0, [59.2926, 58.4512, 57.6810], [13.8699, 13.8658, 13.7619]),
];

/// One computed fixed-strike maturity group (five strikes, calls and puts).
pub struct FixedGroup {
    pub alpha: f64,
    pub maturity: f64,
    pub psi10: f64,
    /// (strike, call, put)
    pub cells: Vec<(f64, f64, f64)>,
}

/// One computed floating-strike cell.
pub struct FloatCell {
    pub alpha: f64,
    pub maturity: f64,
    pub psi10: f64,
    pub call: f64,
    pub put: f64,
}

pub struct ComputedTables {
    pub fixed: Vec<FixedGroup>,
    pub float: Vec<FloatCell>,
    pub fixed_seconds: f64,
    pub float_seconds: f64,
}

fn compute_tables() -> ComputedTables {
    let params = ModelParams::default();
    let quad = QuadratureSpec::default();

    let start = Instant::now();
    let fixed: Vec<FixedGroup> = ALPHAS
        .into_iter()
        .flat_map(|alpha| MATURITIES.into_iter().map(move |t| (alpha, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(alpha, maturity)| {
            let kernel = Kernel::from_alpha(alpha).expect("grid alphas are valid");
            let session = PricingSession::new(
                &kernel,
                &params,
                maturity,
                StatePath::initial(&params),
                None,
                quad,
                default_steps(&kernel, maturity),
            )
            .expect("session construction");
            let cells = STRIKES
                .into_iter()
                .map(|k| {
                    let call = session
                        .price(OptionKind::FixedAsianCall, Some(k))
                        .unwrap_or_else(|e| panic!("fixed call alpha={alpha} T={maturity} K={k}: {e}"))
                        .price;
                    let put = session
                        .price(OptionKind::FixedAsianPut, Some(k))
                        .unwrap_or_else(|e| panic!("fixed put alpha={alpha} T={maturity} K={k}: {e}"))
                        .price;
                    (k, call, put)
                })
                .collect();
            FixedGroup {
                alpha,
                maturity,
                psi10: session.psi10().expect("psi10").re,
                cells,
            }
        })
        .collect();
    let fixed_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let float: Vec<FloatCell> = ALPHAS
        .into_iter()
        .flat_map(|alpha| MATURITIES.into_iter().map(move |t| (alpha, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(alpha, maturity)| {
            let kernel = Kernel::from_alpha(alpha).expect("grid alphas are valid");
            let session = PricingSession::new(
                &kernel,
                &params,
                maturity,
                StatePath::initial(&params),
                None,
                quad,
                default_steps(&kernel, maturity),
            )
            .expect("session construction");
            let call = session
                .price(OptionKind::FloatAsianCall, None)
                .unwrap_or_else(|e| panic!("float call alpha={alpha} T={maturity}: {e}"))
                .price;
            let put = session
                .price(OptionKind::FloatAsianPut, None)
                .unwrap_or_else(|e| panic!("float put alpha={alpha} T={maturity}: {e}"))
                .price;
            FloatCell {
                alpha,
                maturity,
                psi10: session.psi10().expect("psi10").re,
                call,
                put,
            }
        })
        .collect();
    let float_seconds = start.elapsed().as_secs_f64();

    ComputedTables { fixed, float, fixed_seconds, float_seconds }
}

/// Full production-settings computation of both tables, done once per test
/// process and shared by all criteria.
pub fn tables() -> &'static ComputedTables {
    static TABLES: OnceLock<ComputedTables> = OnceLock::new();
    TABLES.get_or_init(compute_tables)
}

pub fn alpha_index(alpha: f64) -> usize {
    ALPHAS.iter().position(|a| *a == alpha).expect("alpha in grid")
}

/// Reference call/put values for a fixed-strike cell.
pub fn fixed_reference(maturity: f64, strike: f64, alpha: f64) -> (f64, f64) {
    let row = FIXED_TABLE
        .iter()
        .find(|(t, k, _, _)| *t == maturity && *k == strike)
        .expect("cell in reference grid");
    let i = alpha_index(alpha);
    (row.2[i], row.3[i])
}

/// Reference call/put values for a floating-strike cell.
pub fn float_reference(maturity: f64, alpha: f64) -> (f64, f64) {
    let row = FLOAT_TABLE
        .iter()
        .find(|(t, _, _)| *t == maturity)
        .expect("cell in reference grid");
    let i = alpha_index(alpha);
    (row.1[i], row.2[i])
}

/// Absolute tolerance for table reproduction at a given roughness level.
pub fn table_tolerance(alpha: f64) -> f64 {
    if alpha == 1.0 {
        1e-3
    } else {
        5e-3
    }
}
