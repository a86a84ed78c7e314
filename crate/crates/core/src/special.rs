use libm::erfc;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF via `erfc`, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 − Φ(x)`.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn ratio(a: &[f64; 8], b: &[f64; 8], r: f64) -> f64 {
    let num = a.iter().rev().fold(0.0, |acc, c| acc * r + c);
    let den = b.iter().rev().fold(0.0, |acc, c| acc * r + c);
    num / den
}

/// Standard normal quantile (Wichura, AS 241).
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        const A: [f64; 8] = [
            3.387_132_872_796_366_5, 133.141_667_891_784_38, 1_971.590_950_306_551_4,
            13_731.693_765_509_46, 45_921.953_931_549_87, 67_265.770_927_008_7,
            33_430.575_583_588_13, 2_509.080_928_730_122_7,
        ];
        const B: [f64; 8] = [
            1.0, 42.313_330_701_600_91, 687.187_007_492_057_9, 5_394.196_021_424_751,
            21_213.794_301_586_597, 39_307.895_800_092_71, 28_729.085_735_721_943,
            5_226.495_278_852_545,
        ];
        let r = 0.180_625 - q * q;
        return q * ratio(&A, &B, r);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        const C: [f64; 8] = [
            1.423_437_110_749_683_5, 4.630_337_846_156_546, 5.769_497_221_460_691,
            3.647_848_324_763_204_5, 1.270_458_252_452_368_4, 0.241_780_725_177_450_6,
            0.022_723_844_989_269_184, 7.745_450_142_783_414e-4,
        ];
        const D: [f64; 8] = [
            1.0, 2.053_191_626_637_759, 1.676_384_830_183_803_8, 0.689_767_334_985_1,
            0.148_103_976_427_480_08, 0.015_198_666_563_616_457, 5.475_938_084_995_345e-4,
            1.050_750_071_644_416_9e-9,
        ];
        ratio(&C, &D, r - 1.6)
    } else {
        const E: [f64; 8] = [
            6.657_904_643_501_103, 5.463_784_911_164_114, 1.784_826_539_917_291_3,
            0.296_560_571_828_504_9, 0.026_532_189_526_576_124, 0.001_242_660_947_388_078_4,
            2.711_555_568_743_487_6e-5, 2.010_334_399_292_288_1e-7,
        ];
        const F: [f64; 8] = [
            1.0, 0.599_832_206_555_888, 0.136_929_880_922_735_8, 0.014_875_361_290_850_615,
            7.868_691_311_456_133e-4, 1.846_318_317_510_054_8e-5, 1.421_511_758_316_446e-7,
            2.044_263_103_389_939_8e-15,
        ];
        ratio(&E, &F, r - 5.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}
