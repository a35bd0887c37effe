use arcbilliard::analysis::fit_peaks_xy;
use arcbilliard::geometry::{build_geometry, tip_positions};
use arcbilliard::raytrace::horizontal_monodromy;
use proptest::prelude::*;

proptest! {
    #[test]
    fn tips_mirror_and_lie_on_arc(r in 5.0f64..60.0, alpha in 10.0f64..170.0, ratio in 0.5f64..1.8) {
        let g = build_geometry(r, alpha, ratio * r, 0.2);
        prop_assume!(g.is_ok());
        let g = g.unwrap();
        let (up, down) = tip_positions(&g);
        prop_assert!((up.x - down.x).abs() < 1e-12 && (up.y + down.y).abs() < 1e-12);
        prop_assert!((up.distance(g.arc_center()) - r).abs() < 1e-9 * r);
        prop_assert!((up.y - r * (alpha.to_radians() / 2.0).sin()).abs() < 1e-9 * r);
    }

    #[test]
    fn trace_is_linear_in_separation(r in 5.0f64..60.0, ratio in 0.5f64..1.8) {
        let d = ratio * r;
        let g = build_geometry(r, 106.0, d, 0.2).unwrap();
        let tr = horizontal_monodromy(&g).trace;
        prop_assert!((tr - (2.0 - 4.0 * d / r)).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_center_recovered(x0 in 2.0f64..8.0, w in 0.1f64..0.6, h in 0.05f64..1.0) {
        let x: Vec<f64> = (0..401).map(|i| 10.0 * i as f64 / 400.0).collect();
        let y: Vec<f64> = x.iter().map(|v| h / (1.0 + (2.0 * (v - x0) / w).powi(2))).collect();
        let peaks = fit_peaks_xy(&x, &y, 0.01 * h);
        prop_assert_eq!(peaks.len(), 1);
        prop_assert!((peaks[0].center - x0).abs() < 1e-6);
        prop_assert!((peaks[0].width - w).abs() < 1e-4);
    }
}
