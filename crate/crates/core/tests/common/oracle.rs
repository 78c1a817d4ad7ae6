//! Brute-force reference for high staircases: explicit offsets from the
//! closed form and point orbits followed level by level.

use num_bigint::BigInt;
use num_traits::One;
use num_rational::BigRational;

/// Stage parameters of a high staircase; the last entry of each list repeats.
#[derive(Clone, Debug)]
pub struct Params {
    pub h0: i128,
    pub r: Vec<usize>,
    pub z: Vec<i128>,
    /// Prefix width; the first `d` gaps are `h + z + 1`.
    pub d: usize,
}

impl Params {
    pub fn r(&self, n: usize) -> usize {
        self.r[n.min(self.r.len() - 1)]
    }

    pub fn z(&self, n: usize) -> i128 {
        self.z[n.min(self.z.len() - 1)]
    }
}

/// `h[n]`, and `offsets[n]` is `C_{n+1}`. With `H = h_n + z_n` and `j = i - d`,
/// `c_i = i (H + 1)` for `i <= d` and `c_i = d (H + 1) + j H + j (j - 1) / 2`
/// beyond.
pub struct Tower {
    pub params: Params,
    pub h: Vec<i128>,
    pub offsets: Vec<Vec<i128>>,
    pub cuts: Vec<BigInt>,
}

impl Tower {
    pub fn new(params: Params) -> Self {
        Tower { h: vec![params.h0], offsets: Vec::new(), cuts: vec![BigInt::one()], params }
    }

    pub fn grow_to(&mut self, level: usize) {
        while self.h.len() <= level {
            let n = self.h.len() - 1;
            let (h, r, z) = (self.h[n], self.params.r(n) as i128, self.params.z(n));
            let bound = (h + z).checked_add(r).and_then(|x| x.checked_mul(r + 1));
            assert!(bound.is_some_and(|x| x < i128::MAX / 2), "oracle heights overflow");
            let d = self.params.d as i128;
            let big = h + z;
            let c_at = |i: i128| {
                if i <= d {
                    i * (big + 1)
                } else {
                    let j = i - d;
                    d * (big + 1) + j * big + j * (j - 1) / 2
                }
            };
            let c: Vec<i128> = (0..r).map(c_at).collect();
            self.h.push(c_at(r));
            self.offsets.push(c);
            let next = &self.cuts[n] * BigInt::from(r);
            self.cuts.push(next);
        }
    }

    fn expand(&self, points: &[i128], from: usize, to: usize) -> Vec<i128> {
        assert!(points.is_empty() || to < self.h.len(), "oracle tower too shallow");
        let mut pts = points.to_vec();
        for n in from..to {
            pts = self.offsets[n].iter().flat_map(|c| pts.iter().map(move |x| x + c)).collect();
        }
        pts
    }

    /// Whether level-`level` coordinate `y` lies over `set` at `set_level`.
    fn contains(&self, set: &[i128], set_level: usize, mut y: i128, mut level: usize) -> bool {
        while level > set_level {
            let below = self.h[level - 1];
            match self.offsets[level - 1].iter().find(|&&c| c <= y && y < c + below) {
                Some(c) => y -= c,
                None => return false,
            }
            level -= 1;
        }
        set.binary_search(&y).is_ok()
    }

    /// `mu(T^m A cap B)` for cylinders given as point lists. The tower must
    /// already be grown past the level where every orbit resolves.
    pub fn correlation(&self, m: i128, a: (usize, &[i128]), b: (usize, &[i128])) -> BigRational {
        if m < 0 {
            return self.correlation(-m, b, a);
        }
        let start = a.0.max(b.0);
        let mut frontier = self.expand(a.1, a.0, start);
        let mut sorted_b = b.1.to_vec();
        sorted_b.sort_unstable();
        let mut total = BigRational::from_integer(0.into());
        let mut level = start;
        while !frontier.is_empty() {
            let mut hits = 0i128;
            let mut spill = Vec::new();
            for &x in &frontier {
                let y = x + m;
                if y < self.h[level] {
                    if self.contains(&sorted_b, b.0, y, level) {
                        hits += 1;
                    }
                } else {
                    spill.push(x);
                }
            }
            total += BigRational::new(BigInt::from(hits), self.cuts[level].clone());
            frontier = self.expand(&spill, level, level + 1);
            level += 1;
        }
        total
    }
}
