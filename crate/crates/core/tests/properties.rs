//! Property tests for the synthesis pipeline and the response file format.

use nalgebra::DMatrix;
use proptest::prelude::*;
use slsnet::synthesis::{achievability_residual, synthesize, SynthesisProblem};
use slsnet::{network_plant, Graph, SupportMask, SystemResponse};

/// Finite values with a bias toward awkward cases (negative zero, huge and
/// tiny magnitudes).
fn awkward_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        5 => -1.0e6..1.0e6f64,
        1 => Just(-0.0f64),
        1 => Just(0.0f64),
        1 => -1.0e-300..1.0e-300f64,
        1 => prop_oneof![Just(1.0e300f64), Just(-1.0e300f64)],
    ]
}

fn arb_response() -> impl Strategy<Value = SystemResponse> {
    (1usize..=4, 1usize..=3, 0usize..=3).prop_flat_map(|(horizon, n, m)| {
        let x_len = horizon * n * n;
        let u_len = horizon * m * n;
        (
            prop::collection::vec(awkward_f64(), x_len),
            prop::collection::vec(awkward_f64(), u_len),
        )
            .prop_map(move |(xs, us)| {
                let phi_x = (0..horizon)
                    .map(|t| DMatrix::from_row_slice(n, n, &xs[t * n * n..(t + 1) * n * n]))
                    .collect();
                let phi_u = (0..horizon)
                    .map(|t| DMatrix::from_row_slice(m, n, &us[t * m * n..(t + 1) * m * n]))
                    .collect();
                SystemResponse::new(phi_x, phi_u).expect("valid shapes")
            })
    })
}

#[derive(Debug, Clone)]
struct Instance {
    problem: SynthesisProblem,
}

fn arb_instance() -> impl Strategy<Value = Instance> {
    let topology = prop_oneof![
        (2usize..=6).prop_map(|n| Graph::chain(n).expect("valid chain")),
        ((2usize..=3), (2usize..=3)).prop_map(|(r, c)| Graph::grid(r, c).expect("valid grid")),
    ];
    (
        topology,
        -0.9..0.9f64,
        -0.4..0.4f64,
        prop_oneof![0.5..2.0f64, (-2.0..-0.5f64)],
        1usize..=5,
        prop_oneof![3 => (1usize..=3).prop_map(Some), 1 => Just(None)],
        0.1..5.0f64,
        0.1..5.0f64,
    )
        .prop_map(|(graph, selfc, nbr, bscale, horizon, d, qd, rd)| {
            let n = graph.n_nodes();
            let plant = network_plant(&graph, selfc, nbr, bscale, 1.0).expect("valid plant");
            let mask = match d {
                Some(d) => SupportMask::locality(&graph, &plant, d, horizon).expect("valid mask"),
                None => SupportMask::dense(n, n, horizon).expect("valid mask"),
            };
            let problem = SynthesisProblem::new(
                plant,
                horizon,
                DMatrix::identity(n, n) * qd,
                DMatrix::identity(n, n) * rd,
                mask,
            )
            .expect("valid problem");
            Instance { problem }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn response_files_round_trip_bit_exactly(phi in arb_response()) {
        let mut buf = Vec::new();
        phi.write_to(&mut buf).unwrap();
        let back = SystemResponse::read_from(buf.as_slice()).unwrap();
        for tau in 1..=phi.horizon() {
            for (a, b) in phi.x_at(tau).iter().zip(back.x_at(tau).iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in phi.u_at(tau).iter().zip(back.u_at(tau).iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    /// Every full-actuation instance with locality radius >= 1 is feasible,
    /// and the solution is achievable, exactly local, and identity-pinned.
    #[test]
    fn synthesis_is_achievable_and_respects_the_mask(inst in arb_instance()) {
        let prob = &inst.problem;
        let phi = synthesize(prob).unwrap();
        let residuals = achievability_residual(&prob.plant, &phi).unwrap();
        let worst = residuals.into_iter().fold(0.0f64, f64::max);
        prop_assert!(worst <= 1e-9, "residual {worst}");
        prop_assert_eq!(prob.mask.violations(&phi).unwrap(), 0);
        let n = prob.plant.n_states();
        prop_assert_eq!(phi.x_at(1), &DMatrix::identity(n, n));
    }
}
