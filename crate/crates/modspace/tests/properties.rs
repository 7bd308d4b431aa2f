//! Property tests: parser round-trips, derivative-vs-difference agreement,
//! residual invariances, and compiled-vs-tree evaluation.

use modspace::expr::{differentiate, parse, BinaryOp, CompiledExpr, Expr, Func, UnaryOp};
use modspace::manifold::functional_residual;
use modspace::systems::builtin;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Expressions in parser normal form: literal constants are non-negative
/// (negation is a node), power exponents are constants, and no division has
/// a literal zero denominator.
fn arb_expr(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        (0.0..1000.0_f64).prop_map(Expr::Constant),
        prop_oneof![Just("x"), Just("z"), Just("w")].prop_map(Expr::variable),
    ];
    leaf.prop_recursive(depth, 64, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Unary(UnaryOp::Neg, Box::new(e))),
            (inner.clone(), inner.clone(), arb_binop()).prop_map(|(a, b, op)| {
                Expr::Binary(op, Box::new(a), Box::new(b))
            }),
            (inner.clone(), arb_exponent()).prop_map(|(base, exp)| {
                Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(Expr::Constant(exp)))
            }),
            (inner, arb_func()).prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
    .prop_filter("no literal-zero denominator", |e| no_zero_denominator(e))
    .boxed()
}

fn arb_binop() -> impl Strategy<Value = BinaryOp> {
    prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
    ]
}

fn arb_exponent() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(2.0),
        Just(3.0),
        Just(-1.0),
        Just(-2.0),
        Just(0.5),
        (0.25..4.0_f64),
    ]
}

fn arb_func() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Tanh),
        Just(Func::Sech),
        Just(Func::Sinh),
        Just(Func::Cosh),
        Just(Func::Exp),
        Just(Func::Ln),
        Just(Func::Sin),
        Just(Func::Cos),
    ]
}

fn no_zero_denominator(e: &Expr) -> bool {
    match e {
        Expr::Constant(_) | Expr::Variable(_) => true,
        Expr::Unary(_, a) | Expr::Call(_, a) => no_zero_denominator(a),
        Expr::Binary(op, a, b) => {
            if *op == BinaryOp::Div && b.is_zero() {
                return false;
            }
            no_zero_denominator(a) && no_zero_denominator(b)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_print_is_structural_identity(e in arb_expr(7)) {
        let printed = e.to_string();
        let reparsed = parse(&printed)
            .unwrap_or_else(|err| panic!("{printed} failed to reparse: {err}"));
        prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
    }
}

proptest! {
    #[test]
    fn compiled_evaluation_matches_tree_walk(
        e in arb_expr(5),
        x in -3.0..3.0_f64,
        z in -3.0..3.0_f64,
        w in -3.0..3.0_f64,
    ) {
        let tree = e.eval(&[("x", x), ("z", z), ("w", w)]);
        let compiled = CompiledExpr::compile(&e, &["x", "z", "w"]).unwrap();
        let direct = compiled.eval_alloc(&[x, z, w]);
        // The compiled path skips intermediate finiteness checks (the
        // integrator guards its own state), so only finite tree results
        // are comparable.
        if let Ok(v) = tree {
            prop_assert_eq!(v, direct);
        }
    }

    #[test]
    fn residual_invariant_under_positive_affine_maps(
        scale_x in 0.1..10.0_f64,
        shift_x in -5.0..5.0_f64,
        scale_y in 0.1..10.0_f64,
    ) {
        let xs: Vec<f64> = (0..640).map(|i| -2.0 + i as f64 / 160.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.tanh() + 0.1 * x).collect();
        let base = functional_residual(&xs, &ys).unwrap();
        let xs2: Vec<f64> = xs.iter().map(|x| scale_x * x + shift_x).collect();
        let ys2: Vec<f64> = ys.iter().map(|y| scale_y * y).collect();
        let mapped = functional_residual(&xs2, &ys2).unwrap();
        prop_assert!((base - mapped).abs() < 1e-9, "{} vs {}", base, mapped);
    }
}

/// Symbolic gain vs central differences at 100 random points per built-in
/// term; relative error below 1e-6 away from near-zero gains.
#[test]
fn derivative_agrees_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in ["rossler_v1", "rossler_v2", "rossler_original", "fitzhugh_nagumo"] {
        let system = builtin(name).unwrap();
        let term = system.term.as_ref().unwrap();
        let gain = differentiate(&term.expr, &term.input_var);
        let mut checked = 0;
        while checked < 100 {
            let x = rng.gen_range(-3.0..3.0);
            let z = rng.gen_range(-3.0..3.0);
            let bindings = [
                (term.input_var.as_str(), z),
                (term.modulator_var.as_str(), x),
            ];
            let g = gain.eval(&bindings).unwrap();
            if g.abs() < 1e-8 {
                continue;
            }
            let h = 1e-5;
            let hi = term
                .expr
                .eval(&[(term.input_var.as_str(), z + h), (term.modulator_var.as_str(), x)])
                .unwrap();
            let lo = term
                .expr
                .eval(&[(term.input_var.as_str(), z - h), (term.modulator_var.as_str(), x)])
                .unwrap();
            let fd = (hi - lo) / (2.0 * h);
            // Normalize by max(1, |G|): deep in tanh saturation the gain is
            // ~1e-6 and the central difference loses that many digits to
            // cancellation, so a bare relative error is not meaningful there.
            let rel = (g - fd).abs() / g.abs().max(1.0);
            assert!(rel < 1e-6, "{name} at ({x}, {z}): rel err {rel:e}");
            checked += 1;
        }
    }
}
