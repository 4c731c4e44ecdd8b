//! Small integrands used in tests, benchmarks and the CLI.

use crate::linalg::rat;
use crate::poly::PositivePolynomial;
use crate::toric::ToricData;

fn poly(k: usize, terms: &[(i64, &[i64])]) -> PositivePolynomial {
    PositivePolynomial::new(k, terms.iter().map(|(c, e)| (rat(*c), e.to_vec())).collect())
        .expect("valid fixture")
}

/// `f = x0² x1` over `g = (x0 + x1)(x0 + 3 x1)(5 x0 + x1)` on the projective line.
pub fn cubic_on_line() -> (ToricData, PositivePolynomial, PositivePolynomial) {
    let f = poly(2, &[(1, &[2, 1])]);
    let g = poly(2, &[(1, &[1, 0]), (1, &[0, 1])])
        .mul(&poly(2, &[(1, &[1, 0]), (3, &[0, 1])]))
        .mul(&poly(2, &[(5, &[1, 0]), (1, &[0, 1])]));
    (ToricData::projective_space(1), f, g)
}

/// A degree-(3,8,8) pair on the pentagon surface.
pub fn pentagon_pair() -> (ToricData, PositivePolynomial, PositivePolynomial) {
    let f = poly(5, &[(2, &[2, 2, 3, 1, 3]), (3, &[2, 1, 2, 2, 4]), (5, &[1, 2, 5, 1, 2])]);
    let g = poly(
        5,
        &[(7, &[3, 3, 2, 0, 3]), (11, &[3, 1, 0, 2, 5]), (13, &[1, 0, 3, 3, 4]), (17, &[0, 2, 7, 1, 1])],
    );
    (ToricData::pentagon(), f, g)
}

/// `x0 x1 / (x0 + x1)²` on the projective line; the integral is 1.
pub fn line_density() -> (ToricData, PositivePolynomial, PositivePolynomial) {
    let f = poly(2, &[(1, &[1, 1])]);
    let g = poly(2, &[(1, &[2, 0]), (2, &[1, 1]), (1, &[0, 2])]);
    (ToricData::projective_space(1), f, g)
}
