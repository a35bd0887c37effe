//! Cylinder functions for real arguments, backed by `puruspe`.

use num_complex::Complex64;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn j0(x: f64) -> f64 {
    puruspe::Jn(0, x)
}

pub fn y0(x: f64) -> f64 {
    puruspe::Yn(0, x)
}

/// `H0^(1)(x) = J0(x) + i Y0(x)` for `x > 0`.
pub fn hankel1_0(x: f64) -> Complex64 {
    Complex64::new(puruspe::Jn(0, x), puruspe::Yn(0, x))
}

/// `H1^(1)(x)` for `x > 0`.
pub fn hankel1_1(x: f64) -> Complex64 {
    Complex64::new(puruspe::Jn(1, x), puruspe::Yn(1, x))
}

/// Integer-order Bessel function of the first kind; `J_{-n} = (-1)^n J_n`.
pub fn jn(n: i32, x: f64) -> f64 {
    let v = puruspe::Jn(n.unsigned_abs(), x);
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Integer-order Hankel function of the first kind.
pub fn hankel1_n(n: i32, x: f64) -> Complex64 {
    let m = n.unsigned_abs();
    let h = Complex64::new(puruspe::Jn(m, x), puruspe::Yn(m, x));
    if n < 0 && n % 2 != 0 {
        -h
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables.
        assert_relative_eq!(j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-14);
        assert_relative_eq!(y0(1.0), 0.088_256_964_215_676_96, epsilon = 1e-14);
        assert_relative_eq!(jn(2, 3.0), 0.486_091_260_585_891_1, epsilon = 1e-13);
        assert_relative_eq!(jn(-3, 2.0), -0.128_943_249_474_402_05, epsilon = 1e-13);
    }

    #[test]
    fn small_argument_log_behaviour() {
        // Y0(x) ~ (2/pi)(ln(x/2) + gamma) as x -> 0.
        let x = 1e-6;
        let approx = 2.0 / std::f64::consts::PI * ((x / 2.0f64).ln() + EULER_GAMMA);
        assert!((y0(x) - approx).abs() < 1e-10);
    }

    #[test]
    fn wronskian() {
        // J1 Y0 - J0 Y1 = 2/(pi x)
        for x in [0.3, 2.0, 17.5, 80.0] {
            let h0 = hankel1_0(x);
            let h1 = hankel1_1(x);
            let w = h1.re * h0.im - h0.re * h1.im;
            assert_relative_eq!(w, 2.0 / (std::f64::consts::PI * x), max_relative = 1e-12);
        }
    }
}
