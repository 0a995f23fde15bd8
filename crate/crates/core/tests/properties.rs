use proptest::prelude::*;
use refractor_core::fresnel::{discriminant, principal_sheet_radii};
use refractor_core::snell::refract_by_bisection;
use refractor_core::{refract, Mat, MediumPair, Norm, Regime, UniformSurface, Vector};

fn vec3() -> impl Strategy<Value = Vector<3>> {
    prop::array::uniform3(-1.0..1.0f64)
        .prop_filter("away from the origin", |v| Vector::new(*v).norm() > 0.1)
        .prop_map(Vector::new)
}

fn spd_diag(lo: f64, hi: f64) -> impl Strategy<Value = Mat<3>> {
    prop::array::uniform3(lo..hi).prop_map(Mat::diag)
}

/// Diagonal ellipsoidal pair whose axis ratios all lie on one side of 1.
fn pair(regime: Regime) -> impl Strategy<Value = MediumPair<3>> {
    let (lo, hi) = match regime {
        Regime::CaseI => (0.4, 0.9),
        Regime::CaseII => (1.15, 2.0),
    };
    (prop::array::uniform3(1.0..1.5f64), prop::array::uniform3(lo..hi)).prop_map(|(d1, r)| {
        let d2 = [d1[0] * r[0], d1[1] * r[1], d1[2] * r[2]];
        MediumPair::new(
            Norm::ellipsoidal(Mat::diag(d1)).unwrap(),
            Norm::ellipsoidal(Mat::diag(d2)).unwrap(),
        )
        .unwrap()
    })
}

fn any_regime() -> impl Strategy<Value = MediumPair<3>> {
    prop_oneof![pair(Regime::CaseI), pair(Regime::CaseII)]
}

proptest! {
    #[test]
    fn lq_gradient_is_dual_unit(q in 1.2..6.0f64, x in vec3(), c in 0.1..10.0f64) {
        let n = Norm::<3>::lq(q).unwrap();
        let g = n.gradient(&x).unwrap();
        prop_assert!((n.dual_eval(&g) - 1.0).abs() < 1e-9);
        prop_assert!((g.dot(&x) - n.eval(&x)).abs() < 1e-9 * n.eval(&x));
        prop_assert!((n.eval(&(x * c)) - c * n.eval(&x)).abs() < 1e-12 * c * n.eval(&x));
    }

    #[test]
    fn ellipsoidal_dual_gradient_inverts_gradient(a in spd_diag(0.3, 3.0), x in vec3()) {
        let n = Norm::ellipsoidal(a).unwrap();
        let u = n.normalize(&x).unwrap();
        let back = n.dual_gradient(&n.gradient(&u).unwrap()).unwrap();
        prop_assert!((back - u).norm() < 1e-10);
    }

    #[test]
    fn snell_routes_agree(p in any_regime(), x in vec3(), nu in vec3()) {
        let nu = nu.normalized();
        let x = if x.dot(&nu) < 0.0 { x * -1.0 } else { x };
        let x = p.n1().normalize(&x).unwrap();
        match (refract(&p, &x, &nu), refract_by_bisection(&p, &x, &nu, 1.0)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.m - b.m).norm() < 1e-7);
                prop_assert!((p.n2().eval(&a.m) - 1.0).abs() < 1e-10);
                let jump = p.n2().gradient(&a.m).unwrap() - p.n1().gradient(&x).unwrap();
                prop_assert!(jump.rejection(&nu).norm() < 1e-9);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "routes disagree: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn uniform_surface_refracts_into_its_direction(
        p in any_regime(), m in vec3(), x in vec3(), b in 0.1..10.0f64
    ) {
        let m = p.n2().normalize(&m).unwrap();
        let s = UniformSurface::new(&p, m, b).unwrap();
        let x = p.n1().normalize(&x).unwrap();
        if let Ok(n) = s.normal(&x) {
            if let Ok(e) = refract(&p, &x, &n.unit) {
                prop_assert!((e.m - m).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn fresnel_discriminant_and_sheet_order(tau in prop::array::uniform3(0.2..5.0f64), u in vec3()) {
        let u = u.normalized();
        prop_assert!(discriminant(tau, &u) >= 0.0);
        let (inner, outer) = principal_sheet_radii(tau, &u).unwrap();
        prop_assert!(0.0 < inner && inner <= outer);
    }
}
