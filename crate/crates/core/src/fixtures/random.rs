use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equation::{im_pairs, Basis, EquationSpec, IndexPair, MultiIndex};
use crate::series::rat::int;
use crate::series::UniSeries;

const TRUNC: usize = 10;

fn random_poly(rng: &mut ChaCha8Rng, constant: i64, shift: usize) -> UniSeries {
    let mut s = UniSeries::zero(TRUNC);
    s.set(shift, int(constant));
    for _ in 0..rng.random_range(0..=2) {
        let v = shift + rng.random_range(1..=3);
        if v <= TRUNC {
            let c = rng.random_range(-2i64..=2);
            s.set(v, int(c));
        }
    }
    s
}

/// A small random equation: `m ≤ 4`, up to three linear terms and at most
/// four nonlinear terms, all with integer coefficients.
pub fn random_spec(seed: u64) -> EquationSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=4usize);
    let pairs = im_pairs(m);
    let mut spec = EquationSpec::new(m, TRUNC).with_a(UniSeries::geometric(TRUNC));

    let n_lin = rng.random_range(0..=3usize);
    for pair in pairs.choose_multiple(&mut rng, n_lin) {
        // about a third of the pairs get c(0) = 0 and land in Λ₁
        let c0 = if rng.random_bool(0.35) { 0 } else { rng.random_range(-2i64..=2) };
        if rng.random_bool(0.5) {
            let mut series = random_poly(&mut rng, c0, pair.alpha);
            if c0 == 0 {
                series.set(pair.alpha + rng.random_range(1..=3), int(1));
            }
            spec.add_linear(*pair, Basis::Dx, series);
        } else {
            let mut series = random_poly(&mut rng, c0, 0);
            if c0 == 0 {
                series.set(rng.random_range(1..=3), int(1));
            }
            spec.add_linear(*pair, Basis::Euler, series);
        }
    }

    let n_nl = rng.random_range(1..=4usize);
    for _ in 0..n_nl {
        let nu_len = rng.random_range(0..=2usize);
        let factors: Vec<(IndexPair, usize)> = pairs
            .choose_multiple(&mut rng, nu_len)
            .map(|p| (*p, rng.random_range(1..=2usize)))
            .collect();
        let nu = MultiIndex::from_pairs(factors);
        let mut i = rng.random_range(0..=2usize);
        if i + nu.degree() < 2 {
            i = 2 - nu.degree();
        }
        let v = rng.random_range(0..=5usize);
        let c = *[-2i64, -1, 1, 2, 3].choose(&mut rng).expect("nonempty");
        let mut series = UniSeries::monomial(int(c), v, TRUNC);
        if rng.random_bool(0.3) {
            series.set(v + 1, int(1));
        }
        spec.add_nonlinear(i, nu, series).expect("degree at least 2");
    }
    spec
}
