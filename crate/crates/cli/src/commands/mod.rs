pub mod beam_analytic;
pub mod damage;
pub mod fuse;
pub mod modes;
pub mod schur;
pub mod two_span;
pub mod weak_gain;
