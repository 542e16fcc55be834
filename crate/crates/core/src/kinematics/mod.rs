//! Modified-DH chains for the thumb, the four fingers and the palm fold joints.

mod chain;
mod dh;
mod hand;
mod transform;

pub use chain::{chain_fk, Digit, KinematicChain};
pub use dh::{dh_transform, DhRow, Theta};
pub use hand::{
    build_hand, digit_chain, palm_finger_chain, palm_joints_for, plain_finger_chain,
    thumb_chain, HandParams,
};
pub use transform::{Transform, Vec3};
