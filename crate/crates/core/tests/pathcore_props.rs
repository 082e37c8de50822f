use std::sync::Arc;

use proptest::prelude::*;

use pqvar::numeric::uniform_grid;
use pqvar::pathcore::io::{read_field_csv, read_path_csv, write_field_csv, write_path_csv};
use pqvar::pathcore::{mollify_1d, MollifierSpec, SampledField, SampledPath, TestFunction};

proptest! {
    #[test]
    fn x3cos_matches_closed_form(x in -2.0f64..2.0) {
        prop_assume!(x.abs() > 1e-6);
        let f: TestFunction = "x3cos".parse().unwrap();
        prop_assert_eq!(f.eval1(x).unwrap(), x.powi(3) * (1.0 / x).cos());
        let h = 1e-6 * x.abs().max(1e-3);
        let fd = (f.eval1(x + h).unwrap() - f.eval1(x - h).unwrap()) / (2.0 * h);
        let g = f.grad_minus1(x).unwrap();
        prop_assert!((fd - g).abs() < 1e-4 * (1.0 + 1.0 / x.abs()), "fd {} vs {}", fd, g);
    }

    #[test]
    fn x3t3cos_partials(t in 0.05f64..1.0, x in 0.05f64..1.0) {
        let f: TestFunction = "x3t3cos".parse().unwrap();
        let exact = (t * x).powi(3) * (1.0 / t + 1.0 / x).cos();
        prop_assert!((f.eval2(t, x).unwrap() - exact).abs() < 1e-15);
        let h = 1e-7;
        let dt = (f.eval2(t + h, x).unwrap() - f.eval2(t - h, x).unwrap()) / (2.0 * h);
        let dx = (f.eval2(t, x + h).unwrap() - f.eval2(t, x - h).unwrap()) / (2.0 * h);
        prop_assert!((dt - f.dt_minus2(t, x).unwrap()).abs() < 1e-4 / (t * t));
        prop_assert!((dx - f.grad_minus2(t, x).unwrap()).abs() < 1e-4 / (x * x));
    }

    #[test]
    fn ramp_and_abs_left_derivatives(a in -1.0f64..1.0, x in -2.0f64..2.0) {
        let ramp = TestFunction::Ramp(a);
        let abs = TestFunction::Abs(a);
        prop_assert_eq!(ramp.eval1(x).unwrap(), (x - a).max(0.0));
        prop_assert_eq!(abs.eval1(x).unwrap(), (x - a).abs());
        prop_assert_eq!(ramp.grad_minus1(x).unwrap(), if x > a { 1.0 } else { 0.0 });
        prop_assert_eq!(abs.grad_minus1(x).unwrap(), if x > a { 1.0 } else { -1.0 });
    }

    #[test]
    fn name_round_trip(a in -10.0f64..10.0, c in prop::collection::vec(-5.0f64..5.0, 1..5)) {
        for f in [TestFunction::Ramp(a), TestFunction::Abs(a), TestFunction::IndicatorStep(a), TestFunction::Polynomial(c.clone())] {
            let back: TestFunction = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }

    #[test]
    fn mollified_affine_is_shifted(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 1.0f64..200.0, x in -1.0f64..1.0) {
        let spec = Arc::new(MollifierSpec::new(256).unwrap());
        let m1 = spec.first_moment();
        let g = mollify_1d(Arc::new(move |y| a * y + b), n, spec).unwrap();
        // ∫ rho(z) (a (x - z/n) + b) dz = a x + b - a m1 / n
        let expected = a * x + b - a * m1 / n;
        prop_assert!((g.eval(x).unwrap() - expected).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
        prop_assert!((g.derivative(x).unwrap() - a).abs() < 1e-6 * (1.0 + a.abs()));
    }

    #[test]
    fn path_csv_and_json_round_trip(v in prop::collection::vec(-1e6f64..1e6, 2..30)) {
        let xs = uniform_grid(0.0, 1.0, v.len() - 1);
        let p = SampledPath::new(xs, v).unwrap().with_label("p");
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        let back = read_path_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.xs(), p.xs());
        prop_assert_eq!(back.values(), p.values());
        let json = serde_json::to_string(&p).unwrap();
        let back: SampledPath = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.values(), p.values());
        prop_assert_eq!(back.meta(), p.meta());
    }
}

#[test]
fn field_csv_round_trip() {
    let xs = uniform_grid(0.0, 1.0, 5);
    let ys = uniform_grid(-1.0, 1.0, 3);
    let f = SampledField::from_fn(xs, ys, |x, y| x * y + 0.1 / 3.0).unwrap();
    let mut buf = Vec::new();
    write_field_csv(&f, &mut buf).unwrap();
    let back = read_field_csv(buf.as_slice()).unwrap();
    assert_eq!(back.values(), f.values());
    assert_eq!(back.xs(), f.xs());
    assert_eq!(back.ys(), f.ys());
    let json = serde_json::to_string(&f).unwrap();
    let back: SampledField = serde_json::from_str(&json).unwrap();
    assert_eq!(back.values(), f.values());
}

#[test]
fn indicator_step_is_left_continuous() {
    let f = TestFunction::IndicatorStep(0.3);
    assert_eq!(f.eval1(0.3).unwrap(), 0.0);
    assert_eq!(f.eval1(0.300001).unwrap(), 1.0);
}
