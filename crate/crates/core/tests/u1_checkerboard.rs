//! Post-selecting the charge sectors of a checkerboard U(1) embedding recovers the original network.

use std::collections::BTreeMap;

use dipeps::circuit::{postselect_contract, PostselectPattern};
use dipeps::contraction::{dense_state, Lattice};
use dipeps::families::{random_di, u1_checkerboard};
use dipeps::{PepsTensor, Site};

fn sector(plus: bool, chi: usize) -> Vec<usize> {
    let off = if plus { 0 } else { chi };
    (off..off + chi).collect()
}

#[test]
fn postselected_embedding_equals_original() {
    let (n, m, d, chi) = (2, 2, 2, 2);
    let inner: Vec<PepsTensor> = (0..n * m).map(|k| random_di(d, chi, 40 + k as u64).unwrap()).collect();
    let mut big = Vec::new();
    for y in 1..=m {
        for x in 1..=n {
            let t = &inner[(y - 1) * n + x - 1];
            big.push(u1_checkerboard(t, (x + y) % 2 == 0, t).unwrap());
        }
    }
    let small = Lattice::new(n, m, inner).unwrap();
    let embedded = Lattice::new(n, m, big).unwrap();
    assert!(embedded.di_residual() < 1e-12);

    // even sites carry Q = +1 with bonds (l, b, r, t) = (+, +, -, -); odd sites the opposite
    let even = |x: usize, y: usize| (x + y).is_multiple_of(2);
    let mut allowed: BTreeMap<Site, Vec<usize>> = BTreeMap::new();
    for y in 1..=m {
        for x in 1..=n {
            allowed.insert((x, y), if even(x, y) { (0..d).collect() } else { (2 * d..3 * d).collect() });
        }
        allowed.insert((0, y), sector(even(1, y), chi));
        allowed.insert((n + 1, y), sector(!even(n, y), chi));
    }
    for x in 1..=n {
        allowed.insert((x, 0), sector(even(x, 1), chi));
        allowed.insert((x, m + 1), sector(!even(x, m), chi));
    }
    let wide = 2 * chi;
    let corner: Vec<usize> = (0..chi).flat_map(|a| (0..chi).map(move |b| a * wide + b)).collect();
    for s in [(0, 0), (n + 1, 0), (0, m + 1), (n + 1, m + 1)] {
        allowed.insert(s, corner.clone());
    }

    let got = postselect_contract(&embedded, &PostselectPattern { allowed }).unwrap();
    let want = dense_state(&small).unwrap();
    assert_eq!(got.amplitudes.shape(), want.shape());
    // left and bottom edges and the corners each carry an extra 1/sqrt 2 from the doubled bond
    let scale = 0.5f64.sqrt().powi((n + m + 4) as i32);
    let diff = got.amplitudes.data().iter().zip(want.data()).map(|(a, b)| (a - b * scale).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-12, "{diff}");
}
