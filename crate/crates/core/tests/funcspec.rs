use proptest::prelude::*;

use retard_heat::funcspec::{BinOp, Env, Expr, Func, FunctionSpec, Var};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4.0f64..4.0).prop_map(|v| Expr::num((v * 8.0).round() / 8.0)),
        Just(Expr::var(Var::X)),
        Just(Expr::var(Var::T)),
    ]
}

/// Smooth expressions built without simplification, so printing exercises
/// every precedence case.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::raw_neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::raw_binary(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::raw_binary(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::raw_binary(BinOp::Mul, a, b)),
            (inner.clone(), 0u8..3).prop_map(|(a, k)| Expr::raw_binary(BinOp::Pow, a, Expr::num(k as f64))),
            inner.clone().prop_map(|a| Expr::raw_call(Func::Sin, a)),
            inner.prop_map(|a| Expr::raw_call(Func::Cos, a)),
        ]
    })
}

fn env(x: f64, t: f64) -> Env {
    Env { x, t, l: None, tau: None }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn printing_round_trips(e in expr(), x in -1.0f64..1.0, t in -1.0f64..1.0) {
        let printed = e.to_string();
        let back = FunctionSpec::parse(&printed).unwrap();
        let want = e.eval(&env(x, t)).unwrap();
        prop_assert!(close(back.eval(x, t).unwrap(), want, 1e-12), "{printed}");
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), x in -1.0f64..1.0, t in -1.0f64..1.0) {
        let d = e.derivative(Var::X).unwrap();
        let h = 1e-5;
        let fd = (e.eval(&env(x + h, t)).unwrap() - e.eval(&env(x - h, t)).unwrap()) / (2.0 * h);
        prop_assert!(close(d.eval(&env(x, t)).unwrap(), fd, 1e-5), "{e}");
    }

    #[test]
    fn derivative_is_linear(a in expr(), b in expr(), k in -3.0f64..3.0, x in -1.0f64..1.0, t in -1.0f64..1.0) {
        let combo = Expr::add(Expr::mul(Expr::num(k), a.clone()), b.clone());
        let lhs = combo.derivative(Var::T).unwrap().eval(&env(x, t)).unwrap();
        let rhs = k * a.derivative(Var::T).unwrap().eval(&env(x, t)).unwrap()
            + b.derivative(Var::T).unwrap().eval(&env(x, t)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }
}

#[test]
fn syntax_errors_carry_offsets() {
    match FunctionSpec::parse("sin(x +") {
        Err(retard_heat::Error::Syntax { offset, .. }) => assert_eq!(offset, 7),
        other => panic!("{other:?}"),
    }
}

#[test]
fn named_constants_need_binding() {
    let f = FunctionSpec::parse("x/l").unwrap();
    assert!(f.eval(1.0, 0.0).is_err());
    assert_eq!(f.bind(Some(2.0), None).eval(1.0, 0.0).unwrap(), 0.5);
}
