//! Adaptive 21-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::context::QuadratureConfig;

// Kronrod abscissae on [-1, 1]; odd entries are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_752_779_733,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Upper bound on the number of subintervals for one integral.
const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("integrand undefined at {0}")]
    Undefined(f64),
    #[error("no convergence: estimate {value} with error {error}")]
    NotConverged { value: f64, error: f64 },
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: usize,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point rule on `[a, b]`: value, error estimate and `∫|f|`.
fn gk21(
    f: &dyn Fn(f64) -> Option<f64>,
    a: f64,
    b: f64,
) -> Result<(f64, f64, f64), QuadratureError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let at = |x: f64| {
        f(x).filter(|v| v.is_finite())
            .ok_or(QuadratureError::Undefined(x))
    };

    let fc = at(c)?;
    let mut fv = [(0.0, 0.0); 10];
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = WGK[10] * fc.abs();
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = h * XGK[j];
        let (l, r) = (at(c - dx)?, at(c + dx)?);
        *slot = (l, r);
        resk += WGK[j] * (l + r);
        resabs += WGK[j] * (l.abs() + r.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (l + r);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for (j, (l, r)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((l - mean).abs() + (r - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * h.abs(), resabs * h.abs(), resasc * h.abs());
    let value = resk * h.signum();
    let mut err = (resk - resg * h.abs()).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, err, resabs))
}

/// `∫_a^b f` for `a < b`, split first at the given interior points.
///
/// Subintervals are refined worst-first until the summed error estimate is
/// below `max(abs_tol, rel_tol·|I|)` or every remaining piece has reached
/// the depth limit.
pub fn integrate(
    f: &dyn Fn(f64) -> Option<f64>,
    a: f64,
    b: f64,
    splits: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult, QuadratureError> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, splits, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }
    let mut cuts: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|s| *s > a && *s < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut points = vec![a];
    points.extend(cuts);
    points.push(b);

    let mut heap = BinaryHeap::new();
    let mut finished: Vec<Piece> = Vec::new();
    let mut evaluations = 0;
    let mut roundoff = 0.0;
    for w in points.windows(2) {
        let (value, error, resabs) = gk21(f, w[0], w[1])?;
        evaluations += 21;
        roundoff += 50.0 * f64::EPSILON * resabs;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
        });
    }

    loop {
        let total: f64 = heap.iter().chain(&finished).map(|p| p.value).sum();
        let err: f64 = heap.iter().chain(&finished).map(|p| p.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs()).max(roundoff);
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(QuadratureError::NotConverged {
                value: total,
                error: err,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_deep = worst.depth >= cfg.max_depth || mid <= worst.a || mid >= worst.b;
        if too_deep || heap.len() + finished.len() >= MAX_INTERVALS {
            finished.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, _) = gk21(f, lo, hi)?;
            evaluations += 21;
            heap.push(Piece {
                a: lo,
                b: hi,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
    }
}
