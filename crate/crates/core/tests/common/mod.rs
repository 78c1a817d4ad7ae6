#![allow(dead_code)]

pub mod oracle;

use cfrank::construction::{Schedule, SeqSpec};
use cfrank::cylinder::{CylinderSet, IntervalSet};
use num_bigint::BigInt;
use rand::Rng;

pub use oracle::{Params, Tower};

pub fn schedule_of(name: &str, p: &Params) -> Schedule {
    let s = Schedule::high_staircase(
        name,
        p.h0 as i64,
        SeqSpec::list(p.r.iter().map(|&r| r as i64)),
        SeqSpec::list(p.z.iter().map(|&z| z as i64)),
    );
    if p.d > 0 {
        s.with_prefix(SeqSpec::constant(p.d as i64))
    } else {
        s
    }
}

/// Random high staircase parameters for stages `0..stages`.
pub fn random_params(rng: &mut impl Rng, stages: usize, max_r: usize, max_z: i128) -> Params {
    Params {
        h0: rng.gen_range(1..=3),
        r: (0..stages).map(|_| rng.gen_range(2..=max_r)).collect(),
        z: (0..stages).map(|_| rng.gen_range(0..=max_z)).collect(),
        d: 0,
    }
}

/// A union of up to four random intervals inside `[0, h)`.
pub fn random_set(rng: &mut impl Rng, h: i128) -> IntervalSet {
    let n = rng.gen_range(1..=4);
    let pieces = (0..n)
        .map(|_| {
            let a = rng.gen_range(0..h);
            let b = rng.gen_range(a + 1..=(a + 1 + h / 4).min(h));
            (BigInt::from(a), BigInt::from(b))
        })
        .collect();
    IntervalSet::new(pieces)
}

pub fn random_cylinder(rng: &mut impl Rng, tower: &Tower, max_level: usize) -> CylinderSet {
    let level = rng.gen_range(0..=max_level);
    CylinderSet::new(level, random_set(rng, tower.h[level]))
}

pub fn points_of(c: &CylinderSet) -> Vec<i128> {
    c.set
        .intervals()
        .iter()
        .flat_map(|(a, b)| {
            let (a, b): (i128, i128) = (a.try_into().unwrap(), b.try_into().unwrap());
            a..b
        })
        .collect()
}
