//! Bessel functions J0, J1, K0, K1 from the Abramowitz & Stegun polynomial
//! approximations (9.4.1–9.4.6, 9.8.1–9.8.8). Relative accuracy is about 1e-7,
//! which is ample for step-index mode parameters.

fn poly(x: f64, c: &[f64]) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 3.0 {
        let y = (x / 3.0).powi(2);
        poly(
            y,
            &[1.0, -2.249_999_7, 1.265_620_8, -0.316_386_6, 0.044_447_9, -0.003_944_4, 0.000_210_0],
        )
    } else {
        let y = 3.0 / ax;
        let f0 = poly(
            y,
            &[0.797_884_56, -0.000_000_77, -0.005_527_40, -0.000_095_12, 0.001_372_37, -0.000_728_05, 0.000_144_76],
        );
        let t0 = ax
            + poly(
                y,
                &[-0.785_398_16, -0.041_663_97, -0.000_039_54, 0.002_625_73, -0.000_541_25, -0.000_293_33, 0.000_135_58],
            );
        f0 * t0.cos() / ax.sqrt()
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax <= 3.0 {
        let y = (x / 3.0).powi(2);
        ax * poly(
            y,
            &[0.5, -0.562_499_85, 0.210_935_73, -0.039_542_89, 0.004_433_19, -0.000_317_61, 0.000_011_09],
        )
    } else {
        let y = 3.0 / ax;
        let f1 = poly(
            y,
            &[0.797_884_56, 0.000_001_56, 0.016_596_67, 0.000_171_05, -0.002_495_11, 0.001_136_53, -0.000_200_33],
        );
        let t1 = ax
            + poly(
                y,
                &[-2.356_194_49, 0.124_996_12, 0.000_056_50, -0.006_378_79, 0.000_743_48, 0.000_798_24, -0.000_291_66],
            );
        f1 * t1.cos() / ax.sqrt()
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 3.75 {
        let y = (x / 3.75).powi(2);
        poly(y, &[1.0, 3.515_622_9, 3.089_942_4, 1.206_749_2, 0.265_973_2, 0.036_076_8, 0.004_581_3])
    } else {
        let y = 3.75 / ax;
        ax.exp() / ax.sqrt()
            * poly(
                y,
                &[
                    0.398_942_28, 0.013_285_92, 0.002_253_19, -0.001_575_65, 0.009_162_81, -0.020_577_06,
                    0.026_355_37, -0.016_476_33, 0.003_923_77,
                ],
            )
    }
}

fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax <= 3.75 {
        let y = (x / 3.75).powi(2);
        ax * poly(
            y,
            &[0.5, 0.878_905_94, 0.514_988_69, 0.150_849_34, 0.026_587_33, 0.003_015_32, 0.000_324_11],
        )
    } else {
        let y = 3.75 / ax;
        ax.exp() / ax.sqrt()
            * poly(
                y,
                &[
                    0.398_942_28, -0.039_880_24, -0.003_620_18, 0.001_638_01, -0.010_315_55, 0.022_829_67,
                    -0.028_953_12, 0.017_876_54, -0.004_200_59,
                ],
            )
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// Modified Bessel function of the second kind, order 0, for `x > 0`.
pub fn bessel_k0(x: f64) -> f64 {
    assert!(x > 0.0, "K0 needs a positive argument");
    if x <= 2.0 {
        let y = x * x / 4.0;
        -(x / 2.0).ln() * bessel_i0(x)
            + poly(
                y,
                &[-0.577_215_66, 0.422_784_20, 0.230_697_56, 0.034_885_90, 0.002_626_98, 0.000_107_50, 0.000_007_40],
            )
    } else {
        let y = 2.0 / x;
        (-x).exp() / x.sqrt()
            * poly(
                y,
                &[1.253_314_14, -0.078_323_58, 0.021_895_68, -0.010_624_46, 0.005_878_72, -0.002_515_40, 0.000_532_08],
            )
    }
}

/// Modified Bessel function of the second kind, order 1, for `x > 0`.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0, "K1 needs a positive argument");
    if x <= 2.0 {
        let y = x * x / 4.0;
        (x / 2.0).ln() * bessel_i1(x)
            + poly(
                y,
                &[1.0, 0.154_431_44, -0.672_785_79, -0.181_568_97, -0.019_194_02, -0.001_104_04, -0.000_046_86],
            ) / x
    } else {
        let y = 2.0 / x;
        (-x).exp() / x.sqrt()
            * poly(
                y,
                &[1.253_314_14, 0.234_986_19, -0.036_556_20, 0.015_042_68, -0.007_803_53, 0.003_256_14, -0.000_682_45],
            )
    }
}
