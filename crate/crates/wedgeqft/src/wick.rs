//! Constrained pairing enumeration for quasifree n-point functions.
//!
//! A quasifree state is determined by its two-point function; the 2n-point
//! function is a signed sum of products over the pairings of {1,..,2n} in
//! which each pair is written with its smaller index first. For fermionic
//! statistics each pairing contributes the sign of the permutation
//! (pi(1),..,pi(n),pi(n+1),..,pi(2n)) -> (1,..,2n) times the overall
//! factor (-1)^(n(n-1)/2).

use num_complex::Complex64 as C64;
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// One pairing of `{0,..,2n-1}`: `pairs[k] = (i, j)` with `i < j`, ordered
/// so that first elements increase. `sign` is the fermionic weight
/// including the global `(-1)^(n(n-1)/2)`; bosonic sums ignore it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub sign: i8,
}

fn permutation_sign(perm: &[usize]) -> i8 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1i8;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

fn generate(n2: usize) -> Vec<Pairing> {
    // Recursive construction: always pair the smallest unpaired index with
    // each larger free index, so pairs come out with increasing first
    // elements and the whole list in a stable lexicographic order.
    fn recurse(free: &mut Vec<usize>, acc: &mut Vec<(usize, usize)>, out: &mut Vec<Pairing>) {
        if free.is_empty() {
            let n = acc.len();
            // perm maps slot -> index: slots 0..n hold the left elements,
            // slots n..2n the right elements of each pair.
            let mut perm = Vec::with_capacity(2 * n);
            perm.extend(acc.iter().map(|p| p.0));
            perm.extend(acc.iter().map(|p| p.1));
            let mut sign = permutation_sign(&perm);
            if (n * (n - 1) / 2) % 2 == 1 {
                sign = -sign;
            }
            out.push(Pairing { pairs: acc.clone(), sign });
            return;
        }
        let first = free[0];
        for pos in 1..free.len() {
            let partner = free[pos];
            let mut rest: Vec<usize> = free.iter().copied().filter(|&x| x != first && x != partner).collect();
            acc.push((first, partner));
            recurse(&mut rest, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    let mut free: Vec<usize> = (0..n2).collect();
    recurse(&mut free, &mut Vec::new(), &mut out);
    out
}

/// All pairings of `{0,..,count-1}`, cached per even `count`. The number of
/// pairings is `(count-1)!!`.
pub fn enumerate_pairings(count: usize) -> Vec<Pairing> {
    assert!(count % 2 == 0, "pairings need an even number of slots");
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<Pairing>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(count).or_insert_with(|| generate(count)).clone()
}

/// Statistics selector for [`assemble_npoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Bose,
    Fermi,
}

/// Quasifree n-point value from a two-point kernel: `omega(i, j)` is
/// evaluated only at `i < j`. Odd `count` returns zero.
pub fn assemble_npoint(
    count: usize,
    statistics: Statistics,
    mut omega: impl FnMut(usize, usize) -> C64,
) -> C64 {
    if count % 2 == 1 {
        return C64::new(0.0, 0.0);
    }
    if count == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut total = C64::new(0.0, 0.0);
    for pairing in enumerate_pairings(count) {
        let mut term = C64::new(1.0, 0.0);
        for &(i, j) in &pairing.pairs {
            term *= omega(i, j);
        }
        if statistics == Statistics::Fermi {
            term *= f64::from(pairing.sign);
        }
        total += term;
    }
    total
}

/// `(count-1)!! = 1*3*5*..*(count-1)`, the pairing count for even `count`.
pub fn double_factorial_odd(count: usize) -> usize {
    (1..count).step_by(2).product()
}
