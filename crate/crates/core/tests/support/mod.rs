#![allow(dead_code)]

pub mod mos;
