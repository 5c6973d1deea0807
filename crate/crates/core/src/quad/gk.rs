//! Globally adaptive Gauss-Kronrod (10/21) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::{QuadConfig, QuadError};

/// Kronrod abscissae on [-1, 1], descending, last entry is the centre.
pub const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

pub const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_795_349_713,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
pub const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Nodes and weights of the 21-point Kronrod rule mapped to [a, b].
pub fn kronrod21_nodes(a: f64, b: f64) -> [(f64, f64); 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 21];
    for j in 0..10 {
        out[2 * j] = (c - h * XGK[j], h * WGK[j]);
        out[2 * j + 1] = (c + h * XGK[j], h * WGK[j]);
    }
    out[20] = (c, h * WGK[10]);
    out
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    pub err: f64,
    pub res_abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One application of the 21-point rule with the QUADPACK error heuristic.
pub(crate) fn gk21<F>(f: &F, a: f64, b: f64) -> Segment
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let value = kronrod * h;
    let res_abs = res_abs * h.abs();
    let res_asc = res_asc * h.abs();
    let mut err = ((kronrod - gauss) * h).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        err,
        res_abs,
    }
}

/// Adaptive integration over consecutive intervals `[points[0], points[1]], ...`.
pub fn integrate_breakpoints<F>(
    f: &F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<(Complex64, f64), QuadError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] != w[0] {
            heap.push(gk21(f, w[0], w[1]));
        }
    }
    let sorted_total = |heap: &BinaryHeap<Segment>| {
        let mut segs: Vec<&Segment> = heap.iter().collect();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        segs.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| {
            (v + s.value, e + s.err)
        })
    };
    let (mut value, mut err) = sorted_total(&heap);
    let mut res_abs: f64 = heap.iter().map(|s| s.res_abs).sum();
    let mut subdivisions = heap.len();
    loop {
        // the last term is the round-off floor of heavily cancelling integrands
        let tol = cfg
            .abs_tol
            .max(cfg.rel_tol * value.norm())
            .max(200.0 * f64::EPSILON * res_abs);
        if err <= tol || heap.is_empty() {
            // summed in interval order so the result does not depend on heap layout
            return Ok(sorted_total(&heap));
        }
        if subdivisions >= cfg.max_subdivisions {
            let (value, err_est) = sorted_total(&heap);
            return Err(QuadError::NonConvergence {
                value,
                err_est,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval can no longer be split in floating point
            heap.push(worst);
            let (value, err_est) = sorted_total(&heap);
            return Err(QuadError::NonConvergence {
                value,
                err_est,
                subdivisions,
            });
        }
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        res_abs += left.res_abs + right.res_abs - worst.res_abs;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}
