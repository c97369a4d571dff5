use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use girthforge::cycles::{poly_girth, sc_girth};
use girthforge::io::{parse_alist, parse_poly, write_alist, write_poly};
use girthforge::optimizer::{hqc_construct, ConstructParams, Descent, Problem};
use girthforge::oracle::graph_girth;
use girthforge::simulate::{random_codeword, syndrome_is_zero};
use girthforge::spreading::{despread, spread, ScCode, SpreadingSpec};
use girthforge::{BivariatePolyMatrix, Monomial, Protomatrix};

fn random_bivariate(seed: u64) -> BivariatePolyMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = (rng.random_range(1..=3), rng.random_range(1..=5));
    let (sx, sy) = (rng.random_range(2..=11), rng.random_range(1..=3));
    let mut h = BivariatePolyMatrix::new(rows, cols, sx, sy).unwrap();
    for i in 0..rows {
        for j in 0..cols {
            let mult = rng.random_range(0..=sy.min(2)) as usize;
            for y in sample(&mut rng, sy as usize, mult).iter() {
                h.insert(i, j, Monomial::new(rng.random_range(0..sx), y as u32)).unwrap();
            }
        }
    }
    h
}

fn random_code(seed: u64) -> ScCode {
    let h = random_bivariate(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(!seed);
    let spec = SpreadingSpec::random(&h.protograph(), rng.random_range(1..=3), &mut rng);
    ScCode::new(spread(&h, &spec.assignment()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn y_then_x_expansion_is_full_expansion(seed in any::<u64>()) {
        let h = random_bivariate(seed);
        prop_assert_eq!(h.y_expand().x_expand(), h.full_expand());
    }

    #[test]
    fn despread_inverts_spread(seed in any::<u64>()) {
        let code = random_code(seed);
        let (h, assignment) = despread(code.components()).unwrap();
        prop_assert_eq!(spread(&h, &assignment).unwrap(), code.components().to_vec());
    }

    #[test]
    fn poly_text_round_trips(seed in any::<u64>()) {
        let code = random_code(seed);
        let text = write_poly(&code, &["round trip".to_string()]);
        let back = parse_poly(&text).unwrap();
        prop_assert_eq!(back.expand(code.w() + 2), code.expand(code.w() + 2));
        prop_assert_eq!(write_poly(&back, &["round trip".to_string()]), text);
    }

    #[test]
    fn alist_round_trips(seed in any::<u64>()) {
        let pcm = random_code(seed).expand(3);
        prop_assert_eq!(parse_alist(&write_alist(&pcm)).unwrap(), pcm);
    }

    #[test]
    fn poly_girth_matches_tanner_girth(seed in any::<u64>()) {
        let h = random_bivariate(seed);
        prop_assert_eq!(poly_girth(&h, 12), graph_girth(&h.full_expand(), 12));
    }

    #[test]
    fn coupling_never_lowers_girth(seed in any::<u64>()) {
        let code = random_code(seed);
        let (h, _) = code.despread().unwrap();
        let block = graph_girth(&h.full_expand(), 12);
        prop_assert!(sc_girth(&code, 12).value() >= block.value());
    }

    #[test]
    fn descent_reaches_a_local_minimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = Protomatrix::all_ones(rng.random_range(2..=3), rng.random_range(3..=5));
        let problem = Problem::block(&block, rng.random_range(5..=15), 1, 8);
        let (x, y) = problem.random_assignment(&mut rng);
        let mut d = Descent::new(&problem, x, y);
        d.run();
        prop_assert!(d.next_step().is_none());
        prop_assert_eq!(problem.total_cost(d.x(), d.y()), d.cost());
        prop_assert!(d.trace().windows(2).all(|t| t[1] < t[0]));
    }

    #[test]
    fn block_construction_meets_target(seed in any::<u64>(), sx in 7u32..=13) {
        let block = Protomatrix::all_ones(2, 4);
        let params = ConstructParams { sx, sy: 1, girth: 8, seed, budget: 20 };
        if let Ok(found) = hqc_construct(&block, &params) {
            prop_assert!(graph_girth(&found.code.full_expand(), 10).at_least(8));
        }
    }

    #[test]
    fn sampled_codewords_satisfy_checks(seed in any::<u64>()) {
        let pcm = random_code(seed).expand(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(syndrome_is_zero(&pcm, &random_codeword(&pcm, &mut rng)));
    }
}
