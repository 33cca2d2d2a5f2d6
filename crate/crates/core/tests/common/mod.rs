//! Random exact instances shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use posauction::{AuctionConfig, Exact, ExactBidder, ExactConfig, ExactCurve};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Instance = (Vec<ExactBidder>, ExactCurve, ExactConfig);

pub fn q(text: &str) -> Exact {
    <Exact as posauction::Scalar>::from_decimal(text).unwrap()
}

pub fn ratio(n: i64, d: i64) -> Exact {
    Exact::new(BigInt::from(n), BigInt::from(d))
}

/// Strictly decreasing CTRs with `slots` entries, the first one 1.
pub fn random_curve(rng: &mut impl Rng, slots: usize) -> ExactCurve {
    let mut cuts: Vec<i64> = (1..100).collect();
    cuts.shuffle(rng);
    let mut picks: Vec<i64> = cuts[..slots - 1].to_vec();
    picks.sort_unstable_by(|a, b| b.cmp(a));
    let mut gammas = vec![Exact::one()];
    gammas.extend(picks.into_iter().map(|p| ratio(p, 100)));
    ExactCurve::new(gammas).unwrap()
}

fn random_relevance(rng: &mut impl Rng) -> Exact {
    ratio(rng.gen_range(1..=8), 4)
}

/// Value scores `e·t` in non-increasing order.
fn random_value_scores(rng: &mut impl Rng, n: usize) -> Vec<Exact> {
    let mut xs: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=60)).collect();
    xs.sort_unstable_by(|a, b| b.cmp(a));
    xs.into_iter().map(|x| ratio(x, 2)).collect()
}

/// An RBR/GSP instance in symmetric equilibrium, built bottom-up: each score
/// is drawn between the bounds that keep the two neighbouring bidders from
/// envying each other's slots. Bidders are listed in rank order.
pub fn random_sne(rng: &mut impl Rng, n: usize, slots: usize) -> Instance {
    let curve = random_curve(rng, slots);
    let xs = random_value_scores(rng, n);
    let g = |p: usize| curve.gamma(p);
    let mut scores = vec![Exact::zero(); n];
    for j in (2..=n).rev() {
        let below = if j < n { scores[j].clone() } else { Exact::zero() };
        if g(j - 1).is_zero() {
            // Both ranks are unslotted; anything up to the value keeps order.
            let cap = xs[j - 1].clone().max(below.clone());
            scores[j - 1] = below.clone() + (cap - below) * ratio(rng.gen_range(0..=4), 4);
            continue;
        }
        let drop = g(j - 1) - g(j);
        let lo = (drop.clone() * xs[j - 1].clone() + g(j) * below.clone()) / g(j - 1);
        let hi = (drop * xs[j - 2].clone() + g(j) * below) / g(j - 1);
        scores[j - 1] = lo.clone() + (hi - lo) * ratio(rng.gen_range(0..=8), 8);
    }
    let second = if n > 1 { scores[1].clone() } else { Exact::zero() };
    scores[0] = second + ratio(rng.gen_range(0..=6), 2);
    // Unslotted ranks must stay at or below the first unslotted score.
    for j in 1..n {
        if scores[j] > scores[j - 1] {
            scores[j] = scores[j - 1].clone();
        }
    }
    let bidders = xs
        .iter()
        .zip(&scores)
        .enumerate()
        .map(|(i, (x, r))| {
            let e = random_relevance(rng);
            ExactBidder::new(format!("b{}", i + 1), x.clone() / e.clone(), e.clone(), r.clone() / e)
        })
        .collect();
    (bidders, curve, AuctionConfig::gsp())
}

/// Unconstrained values and bids, in random order.
pub fn random_profile(rng: &mut impl Rng, n: usize, slots: usize) -> Instance {
    let curve = random_curve(rng, slots);
    let bidders = (0..n)
        .map(|i| {
            let e = random_relevance(rng);
            let t = ratio(rng.gen_range(1..=40), 2);
            let bid = ratio(rng.gen_range(0..=40), 2);
            ExactBidder::new(format!("b{}", i + 1), t, e, bid)
        })
        .collect();
    (bidders, curve, AuctionConfig::gsp())
}
