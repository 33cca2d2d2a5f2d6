//! Position auctions with for-profit mediators.
//!
//! The crate models slot auctions with separable click-through rates,
//! checks symmetric Nash equilibria, and computes how a mediator bidding on
//! behalf of a contiguous block of advertisers can lower their payments
//! without giving the remaining advertisers a reason to move. The
//! [`oracle`] module re-derives every claim by brute force and shares no
//! pricing code with the rest of the crate.
//!
//! All numerics are generic over [`Scalar`]; the aliases below pick `f64`
//! or exact rationals.

pub mod auction;
pub mod equilibrium;
pub mod error;
pub mod fixtures;
pub mod mediator;
pub mod oracle;
pub mod render;
pub mod report;
pub mod run;
pub mod scalar;
pub mod scenario;

pub use auction::{
    outcome, outcome_for, price, rank, AuctionConfig, AuctionOutcome, Bidder, CtrCurve, Pricing, RankedProfile,
    Ranking,
};
pub use equilibrium::{deviation_payoff, is_sne, sne_table, Mode, SneVerdict};
pub use error::{AuctionError, ScenarioError};
pub use mediator::{MediatorPlan, RevenueReport, Strategy};
pub use scalar::Scalar;
pub use scenario::Scenario;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Bidder64 = Bidder<f64>;
pub type CtrCurve64 = CtrCurve<f64>;
pub type AuctionConfig64 = AuctionConfig<f64>;
pub type AuctionOutcome64 = AuctionOutcome<f64>;
pub type MediatorPlan64 = MediatorPlan<f64>;

pub type ExactBidder = Bidder<Exact>;
pub type ExactCurve = CtrCurve<Exact>;
pub type ExactConfig = AuctionConfig<Exact>;
pub type ExactOutcome = AuctionOutcome<Exact>;
pub type ExactPlan = MediatorPlan<Exact>;
pub type ExactScenario = Scenario<Exact>;
