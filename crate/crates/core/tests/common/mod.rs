#![allow(dead_code)]

pub mod daniel;
pub mod inertia;
pub mod unification;
