use super::distribution::MoranDistribution;
use crate::error::{Error, Result};
use crate::io::{csv_writer, finish_csv};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub label_a: String,
    pub label_b: String,
    /// `mean(a) - mean(b)`.
    pub mean_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl ComparisonResult {
    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer();
        w.write_record(["label_a", "label_b", "mean_diff", "ci_low", "ci_high", "level", "n_a", "n_b"])
            .expect("in-memory write");
        w.write_record([
            self.label_a.clone(),
            self.label_b.clone(),
            self.mean_diff.to_string(),
            self.ci_low.to_string(),
            self.ci_high.to_string(),
            self.level.to_string(),
            self.n_a.to_string(),
            self.n_b.to_string(),
        ])
        .expect("in-memory write");
        finish_csv(w)
    }
}

/// Large-sample confidence interval for `mean(a) - mean(b)` with unpooled
/// sample variances and a standard normal quantile.
pub fn diff_means_ci(a: &MoranDistribution, b: &MoranDistribution, level: f64) -> Result<ComparisonResult> {
    let (n_a, n_b) = (a.samples.len(), b.samples.len());
    if n_a < 2 || n_b < 2 {
        return Err(Error::Argument(format!(
            "difference in means needs at least 2 samples per group, got {n_a} and {n_b}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let (ma, va) = mean_var(&a.samples);
    let (mb, vb) = mean_var(&b.samples);
    let z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    let se = (va / n_a as f64 + vb / n_b as f64).sqrt();
    let mean_diff = ma - mb;
    Ok(ComparisonResult {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        mean_diff,
        ci_low: mean_diff - z * se,
        ci_high: mean_diff + z * se,
        level,
        n_a,
        n_b,
    })
}

/// Mean and sample variance (`n - 1` denominator; 0 for a single value).
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Inverse standard normal CDF, Wichura's algorithm AS 241 (PPND16),
/// relative accuracy about 1e-16. Returns ±∞ at 0 and 1 and NaN outside.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Evaluates `c[0] + c[1] r + ... + c[7] r^7`.
fn poly(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * r + k)
}

// AS241 coefficients, quoted as published.
#[allow(clippy::excessive_precision)]
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
#[allow(clippy::excessive_precision)]
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_854_561,
];
#[allow(clippy::excessive_precision)]
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

pub fn comparison_summary(c: &ComparisonResult) -> String {
    format!("mean_diff={} ci=[{},{}]", c.mean_diff, c.ci_low, c.ci_high)
}
