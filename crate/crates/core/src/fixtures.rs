//! The nine-bidder, eight-slot reference instance: relevances of 1, so
//! values and bids are given directly in score units.

use crate::auction::{AuctionConfig, Bidder, CtrCurve};
use crate::scalar::Scalar;

pub const GAMMAS: [&str; 8] = ["1", "0.6", "0.5", "0.4", "0.3", "0.2", "0.15", "0.10"];
pub const VALUE_SCORES: [&str; 9] = ["26", "22", "20", "18", "17", "15", "12", "12", "9"];
pub const SCORES: [&str; 9] = ["25", "20", "16", "15", "14", "13", "11", "10", "9"];

pub fn table1<T: Scalar>() -> (Vec<Bidder<T>>, CtrCurve<T>, AuctionConfig<T>) {
    let parse = |s: &str| T::from_decimal(s).expect("fixture literal");
    let bidders = VALUE_SCORES
        .iter()
        .zip(SCORES)
        .enumerate()
        .map(|(i, (value, score))| Bidder::unit((i + 1).to_string(), parse(value), parse(score)))
        .collect();
    let curve = CtrCurve::new(GAMMAS.iter().map(|g| parse(g)).collect()).expect("fixture curve");
    (bidders, curve, AuctionConfig::gsp())
}
