//! Histories: abstracts decorated with concrete particle labels.
//!
//! A history attaches to each collision i a pair (a_i, b_i):
//! * creation (s_i = +1): a_i is any alive particle, b_i = 1 + max of all
//!   previously seen indices (labels are therefore consecutive integers);
//! * annihilation (s_i = −1): a_i alive, b_i alive with b_i ∉ {a_i, 0};
//!   particle b_i dies (the tagged particle 0 is never annihilated).
//!
//! A consecutive (+1, −1) with the identical pair (a, b) is excluded.

use crate::combinatorics::abstracts::Abstract;
use crate::error::CoreError;

/// One collision record (sign, a, b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Collision {
    pub sign: i8,
    pub a: usize,
    pub b: usize,
}

/// A fully labelled history over an abstract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    pub abstr: Abstract,
    pub collisions: Vec<Collision>,
    /// Alive index sets ω_0..ω_n (sorted).
    pub alive_sets: Vec<Vec<usize>>,
}

impl History {
    /// Number of momentum variables S = (n+m)/2.
    pub fn num_momenta(&self) -> usize {
        self.abstr.num_momenta()
    }

    /// Checks all History invariants from scratch.
    pub fn is_valid(&self) -> bool {
        let m = self.abstr.m;
        let n = self.abstr.len();
        if self.collisions.len() != n || self.alive_sets.len() != n + 1 {
            return false;
        }
        let mut alive: Vec<usize> = (0..=m).collect();
        let mut max_seen = m;
        if self.alive_sets[0] != alive {
            return false;
        }
        for i in 0..n {
            let c = self.collisions[i];
            if c.sign != self.abstr.signs[i] {
                return false;
            }
            if !alive.contains(&c.a) {
                return false;
            }
            if c.sign == 1 {
                if c.b != max_seen + 1 {
                    return false;
                }
                alive.push(c.b);
                alive.sort_unstable();
                max_seen = c.b;
            } else {
                if c.b == c.a || c.b == 0 || !alive.contains(&c.b) {
                    return false;
                }
                alive.retain(|&x| x != c.b);
            }
            if i + 1 < n
                && self.abstr.signs[i] == 1
                && self.abstr.signs[i + 1] == -1
                && self.collisions[i + 1].a == c.a
                && self.collisions[i + 1].b == c.b
            {
                return false;
            }
            if self.alive_sets[i + 1] != alive {
                return false;
            }
        }
        alive == vec![0]
    }
}

/// Enumerates all histories of `a` in lexicographic order over (a_i, b_i)
/// choices, failing with a resource error beyond `cap` histories.
pub fn enumerate_histories_capped(a: &Abstract, cap: usize) -> Result<Vec<History>, CoreError> {
    let n = a.len();
    let m = a.m;
    let mut out: Vec<History> = Vec::new();
    let mut collisions: Vec<Collision> = Vec::with_capacity(n);
    let mut alive_sets: Vec<Vec<usize>> = vec![(0..=m).collect()];

    // Depth-first over label choices; alive set and max label maintained
    // incrementally through push/pop.
    struct Ctx<'x> {
        a: &'x Abstract,
        cap: usize,
        out: Vec<History>,
        collisions: Vec<Collision>,
        alive_sets: Vec<Vec<usize>>,
        overflow: bool,
    }
    fn rec(ctx: &mut Ctx, i: usize, max_seen: usize) {
        if ctx.overflow {
            return;
        }
        let n = ctx.a.len();
        if i == n {
            if ctx.out.len() >= ctx.cap {
                ctx.overflow = true;
                return;
            }
            ctx.out.push(History {
                abstr: ctx.a.clone(),
                collisions: ctx.collisions.clone(),
                alive_sets: ctx.alive_sets.clone(),
            });
            return;
        }
        let alive = ctx.alive_sets[i].clone();
        let sign = ctx.a.signs[i];
        if sign == 1 {
            let b = max_seen + 1;
            for &ca in &alive {
                let mut next = alive.clone();
                next.push(b);
                next.sort_unstable();
                ctx.collisions.push(Collision { sign, a: ca, b });
                ctx.alive_sets.push(next);
                rec(ctx, i + 1, b);
                ctx.alive_sets.pop();
                ctx.collisions.pop();
            }
        } else {
            let excluded = if i > 0 && ctx.a.signs[i - 1] == 1 {
                Some(*ctx.collisions.last().unwrap())
            } else {
                None
            };
            for &ca in &alive {
                for &cb in &alive {
                    if cb == ca || cb == 0 {
                        continue;
                    }
                    if let Some(prev) = excluded {
                        if prev.a == ca && prev.b == cb {
                            continue;
                        }
                    }
                    let next: Vec<usize> = alive.iter().copied().filter(|&x| x != cb).collect();
                    ctx.collisions.push(Collision { sign, a: ca, b: cb });
                    ctx.alive_sets.push(next);
                    rec(ctx, i + 1, max_seen);
                    ctx.alive_sets.pop();
                    ctx.collisions.pop();
                }
            }
        }
    }

    let mut ctx = Ctx {
        a,
        cap,
        out: std::mem::take(&mut out),
        collisions: std::mem::take(&mut collisions),
        alive_sets: std::mem::take(&mut alive_sets),
        overflow: false,
    };
    rec(&mut ctx, 0, m);
    if ctx.overflow {
        return Err(CoreError::ResourceLimit {
            what: "history enumeration".into(),
            limit: cap,
        });
    }
    Ok(ctx.out)
}

/// Default per-call cap on enumerated histories.
pub const DEFAULT_HISTORY_CAP: usize = 10_000_000;

/// Enumerates all histories with the default resource cap.
pub fn enumerate_histories(a: &Abstract) -> Result<Vec<History>, CoreError> {
    enumerate_histories_capped(a, DEFAULT_HISTORY_CAP)
}

/// Number of histories of `a`, by direct product counting over steps.
///
/// At a creation the only choice is a_i (one per alive particle); at an
/// annihilation the (a_i, b_i) with b_i ∉ {a_i, 0} number (|ω|−1)², minus one
/// when the previous step was a creation (the repeated-pair exclusion, which
/// always removes exactly one candidate since the created particle is alive).
pub fn count_histories(a: &Abstract) -> u128 {
    let m = a.m;
    let mut count: u128 = 1;
    let mut alive: u128 = m as u128 + 1;
    for (i, &s) in a.signs.iter().enumerate() {
        if s == 1 {
            count *= alive;
            alive += 1;
        } else {
            // a ≠ 0 leaves |alive|−2 choices of b, a = 0 leaves |alive|−1;
            // the total over a is (|alive|−1)².
            let pairs = (alive - 1) * (alive - 1);
            let excl = if i > 0 && a.signs[i - 1] == 1 { 1 } else { 0 };
            count *= pairs - excl;
            alive -= 1;
        }
    }
    count
}
