pub mod ar;
pub mod bernoulli;
pub mod mixture;
pub mod validate;
pub mod varsel;
