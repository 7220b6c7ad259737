mod common;

use common::{feasible_problem, infeasible_problem, random_psd};
use proptest::prelude::*;
use quartic_cert::poly::{from_gram, monomials};
use quartic_cert::sdp::{extract_squares, solve, sum_of_squares, SdpOptions, SdpStatus};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constructed_feasible(seed in any::<u64>()) {
        let p = feasible_problem(seed);
        let sol = solve(&p, &SdpOptions::default());
        prop_assert_eq!(sol.status, SdpStatus::Feasible, "{}", sol.diagnostics);
        prop_assert!(sol.residual <= 1e-8);
        prop_assert!(p.equality_residual(&sol.blocks) <= 1e-8);
    }

    #[test]
    fn constructed_infeasible(seed in any::<u64>()) {
        let p = infeasible_problem(seed);
        let sol = solve(&p, &SdpOptions::default());
        prop_assert_eq!(sol.status, SdpStatus::Infeasible, "t = {:?}: {}", sol.t, sol.diagnostics);
    }

    #[test]
    fn squares_round_trip(seed in any::<u64>(), rank in 1usize..=15) {
        let basis = monomials(3, 4);
        let g = random_psd(seed, 15, rank);
        let squares = extract_squares(&g, &basis, 1e-9 * g.amax()).unwrap();
        prop_assert!(squares.len() <= 15);
        let err = from_gram(&g, &basis).unwrap().sub(&sum_of_squares(&squares, 3, 8)).unwrap().norm_inf();
        prop_assert!(err <= 1e-10 * g.amax().max(1.0), "{err}");
    }
}
