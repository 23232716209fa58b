//! Scripts behind `b1calc demo`.

pub const XN: &str = "\
# x^n converges pointwise to 0 on [0, 1) and to 1 at 1.
let f = seq(n, x ^ n) on [0, 1];
eval f at 0.5;
eval f at 1;
table f from 0 to 1 step 0.1;
zeroset f eps 0.000001;
";

pub const EXTENSION: &str = "\
# Extend f(0) = 0, f(1) = 1 from {0, 1} to [0, 1].
let f = seq(n, x) on {0, 1};
let X = seq(n, 0) on [0, 1];
extend f on {0, 1} in X rounds 40;
";

/// Run with grid step 0.01.
pub const INTERSECTION: &str = "\
# Common zeros of the bands dist(x, [-1/j, 1/j]).
let g = intersectz(j, seq(n, max(abs(x) - 1 / j, 0))) on [-1, 1];
zeroset g eps 0.000001;
eval g at 0;
eval g at 0.5;
";

pub fn by_name(name: &str) -> Option<(&'static str, Option<f64>)> {
    match name {
        "xn" => Some((XN, None)),
        "extension" => Some((EXTENSION, None)),
        "intersection" => Some((INTERSECTION, Some(0.01))),
        _ => None,
    }
}
