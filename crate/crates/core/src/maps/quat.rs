//! Unit quaternions as points of S^3: `x1 + y1 i + x2 j + y2 k`.
//!
//! In these coordinates the frame fields are left multiplication,
//! `xi(q) = i q`, `X1(q) = j q`, `X2(q) = k q`, so right multiplication
//! `q -> q u` commutes with all three and preserves `eta`.

use crate::s3geom::Vec4;

pub fn mul(a: &Vec4, b: &Vec4) -> Vec4 {
    let [a0, a1, a2, a3] = *a;
    let [b0, b1, b2, b3] = *b;
    [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]
}

pub fn conj(a: &Vec4) -> Vec4 {
    [a[0], -a[1], -a[2], -a[3]]
}
