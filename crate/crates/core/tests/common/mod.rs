#![allow(dead_code)]

pub mod oracle;

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
