//! Quadratic reference implementations of every truncation rule. They work
//! on raw `&[f64]` slices, recompute everything from scratch with plain
//! summation, and decide membership token by token, so they share no code
//! path with the library.

#![allow(dead_code)]

use rand::Rng;

pub fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * x.ln();
        }
    }
    h
}

pub fn p_max(p: &[f64]) -> f64 {
    p.iter().copied().fold(0.0, f64::max)
}

/// Lowest index holding the maximum.
pub fn argmax(p: &[f64]) -> usize {
    let m = p_max(p);
    (0..p.len()).find(|&i| p[i] == m).unwrap()
}

/// Does token `j` rank ahead of token `i`?
fn ahead(p: &[f64], j: usize, i: usize) -> bool {
    p[j] > p[i] || (p[j] == p[i] && j < i)
}

fn scan(p: &[f64], threshold: f64) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| p[i] > 0.0 && p[i] >= threshold)
        .collect()
}

fn scan_or_mode(p: &[f64], threshold: f64) -> Vec<usize> {
    let s = scan(p, threshold);
    if s.is_empty() {
        vec![argmax(p)]
    } else {
        s
    }
}

pub fn top_b(p: &[f64], base: f64) -> Vec<usize> {
    let n = p.len();
    let normalized = if n > 1 {
        entropy(p) / (n as f64).ln()
    } else {
        0.0
    };
    let bandwidth = (base * (1.0 + normalized.min(1.0))).min(1.0);
    scan(p, (1.0 - bandwidth) * p_max(p))
}

pub fn fixed_band(p: &[f64], bandwidth: f64) -> Vec<usize> {
    scan(p, (1.0 - bandwidth) * p_max(p))
}

pub fn top_k(p: &[f64], k: usize) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| p[i] > 0.0 && (0..p.len()).filter(|&j| ahead(p, j, i)).count() < k)
        .collect()
}

/// Token `i` is kept when the mass ranked strictly ahead of it has not yet
/// reached `top`.
pub fn top_p(p: &[f64], top: f64) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| {
            let before: f64 = (0..p.len()).filter(|&j| ahead(p, j, i)).map(|j| p[j]).sum();
            p[i] > 0.0 && before < top
        })
        .collect()
}

pub fn min_p(p: &[f64], alpha: f64) -> Vec<usize> {
    scan(p, alpha * p_max(p))
}

pub fn epsilon(p: &[f64], eps: f64) -> Vec<usize> {
    scan_or_mode(p, eps)
}

pub fn eta(p: &[f64], eta: f64) -> Vec<usize> {
    let cutoff = eta.min(eta.sqrt() * (-entropy(p)).exp());
    scan_or_mode(p, cutoff)
}

pub fn full(p: &[f64]) -> Vec<usize> {
    scan(p, 0.0)
}

/// Random distribution over `n` tokens with a mix of shapes: flat-ish,
/// sharply peaked, with exact zeros, and with exact ties.
pub fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let shape = rng.random_range(0..4);
    let sharpness: f64 = rng.random_range(0.2..6.0);
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(1e-12..1.0);
            (-u.ln()).powf(sharpness)
        })
        .collect();
    match shape {
        1 => {
            // Knock out some tokens but keep at least one.
            for x in w.iter_mut().skip(1) {
                if rng.random_bool(0.3) {
                    *x = 0.0;
                }
            }
        }
        2 => {
            // Duplicate a few weights to force exact ties.
            for _ in 0..n / 3 {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                w[b] = w[a];
            }
        }
        _ => {}
    }
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}
