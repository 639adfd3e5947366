//! Uniform sampling from finite groups of linear maps.
//!
//! Groups generated by signed permutation matrices act faithfully on the
//! `2d` points `{+e_j, -e_j}`, so they are permutation groups of degree
//! `2d`. A base and strong generating set (deterministic Schreier–Sims)
//! gives every element a unique factorization `u_0 u_1 ... u_{m-1}` into
//! transversal elements, and choosing each factor uniformly yields a
//! uniform group element. Other finite groups are enumerated with
//! [`closure`](crate::group::closure) instead.

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{closure, GroupSpec, LinearMap, SignedPermutation};
use crate::scalar::Scalar;

type Perm = Vec<u32>;

fn identity_perm(n: usize) -> Perm {
    (0..n as u32).collect()
}

fn is_identity(p: &[u32]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i as u32 == x)
}

/// `a ∘ b` (apply `b` first).
fn compose(a: &[u32], b: &[u32]) -> Perm {
    b.iter().map(|&x| a[x as usize]).collect()
}

fn invert(a: &[u32]) -> Perm {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

fn point_perm(sp: &SignedPermutation) -> Perm {
    let d = sp.dim();
    let mut p = vec![0u32; 2 * d];
    for j in 0..d {
        let target = 2 * sp.perm()[j] as u32;
        let flip = u32::from(sp.sign()[j] < 0);
        p[2 * j] = target + flip;
        p[2 * j + 1] = target + (1 - flip);
    }
    p
}

fn signed_of_point_perm(p: &[u32]) -> SignedPermutation {
    let d = p.len() / 2;
    let perm = (0..d).map(|j| (p[2 * j] / 2) as usize).collect();
    let sign = (0..d)
        .map(|j| if p[2 * j].is_multiple_of(2) { 1 } else { -1 })
        .collect();
    SignedPermutation::new(perm, sign).expect("valid point permutation")
}

#[derive(Debug, Clone)]
struct Level {
    base: u32,
    orbit: Vec<u32>,
    /// `transversal[b]` maps the base point to `b`.
    transversal: Vec<Option<Perm>>,
    gens: Vec<usize>,
}

/// Base and strong generating set of a permutation group.
#[derive(Debug, Clone)]
pub struct StabilizerChain {
    degree: usize,
    strong: Vec<Perm>,
    levels: Vec<Level>,
}

impl StabilizerChain {
    /// Runs Schreier–Sims on permutations of `0..degree`.
    fn build(degree: usize, generators: Vec<Perm>) -> Self {
        let mut strong: Vec<Perm> = Vec::new();
        for g in generators {
            if !is_identity(&g) && !strong.contains(&g) {
                strong.push(g);
            }
        }
        let mut chain = Self {
            degree,
            strong,
            levels: Vec::new(),
        };
        let mut base: Vec<u32> = Vec::new();
        for s in &chain.strong {
            if base.iter().all(|&b| s[b as usize] == b) {
                base.push(first_moved(s).expect("non-identity"));
            }
        }
        chain.levels = base
            .iter()
            .map(|&b| Level {
                base: b,
                orbit: Vec::new(),
                transversal: Vec::new(),
                gens: Vec::new(),
            })
            .collect();
        for l in 0..chain.levels.len() {
            chain.refresh_level(l);
        }

        let mut i = chain.levels.len() as isize - 1;
        while i >= 0 {
            let l = i as usize;
            chain.refresh_level(l);
            match chain.failing_schreier_generator(l) {
                None => i -= 1,
                Some((h, j)) => {
                    if j == chain.levels.len() {
                        let b = first_moved(&h).expect("non-identity residue");
                        chain.levels.push(Level {
                            base: b,
                            orbit: Vec::new(),
                            transversal: Vec::new(),
                            gens: Vec::new(),
                        });
                    }
                    chain.strong.push(h);
                    for m in l + 1..=j {
                        chain.refresh_level(m);
                    }
                    i = j as isize;
                }
            }
        }
        chain
    }

    /// Recomputes generators, orbit and transversal of level `l` from the
    /// strong generators fixing the earlier base points.
    fn refresh_level(&mut self, l: usize) {
        let prefix: Vec<u32> = self.levels[..l].iter().map(|lv| lv.base).collect();
        let gens: Vec<usize> = (0..self.strong.len())
            .filter(|&s| prefix.iter().all(|&b| self.strong[s][b as usize] == b))
            .collect();
        let base = self.levels[l].base;
        let mut transversal: Vec<Option<Perm>> = vec![None; self.degree];
        transversal[base as usize] = Some(identity_perm(self.degree));
        let mut orbit = vec![base];
        let mut head = 0;
        while head < orbit.len() {
            let p = orbit[head];
            head += 1;
            for &s in &gens {
                let q = self.strong[s][p as usize];
                if transversal[q as usize].is_none() {
                    let u = compose(&self.strong[s], transversal[p as usize].as_ref().unwrap());
                    transversal[q as usize] = Some(u);
                    orbit.push(q);
                }
            }
        }
        let level = &mut self.levels[l];
        level.gens = gens;
        level.orbit = orbit;
        level.transversal = transversal;
    }

    fn failing_schreier_generator(&self, l: usize) -> Option<(Perm, usize)> {
        let level = &self.levels[l];
        for &beta in &level.orbit {
            let u_beta = level.transversal[beta as usize].as_ref().unwrap();
            for &s in &level.gens {
                let s = &self.strong[s];
                let image = s[beta as usize];
                let u_image = level.transversal[image as usize].as_ref().unwrap();
                let schreier = compose(&invert(u_image), &compose(s, u_beta));
                let (h, j) = self.strip(schreier, l + 1);
                if !is_identity(&h) {
                    return Some((h, j));
                }
            }
        }
        None
    }

    /// Sifts `g` through levels `from..`; returns the residue and the level
    /// where sifting stopped.
    fn strip(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g[level.base as usize];
            match &level.transversal[beta as usize] {
                Some(u) => g = compose(&invert(u), &g),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    fn contains(&self, g: &[u32]) -> bool {
        let (h, _) = self.strip(g.to_vec(), 0);
        is_identity(&h)
    }

    /// Group order, `None` on `u128` overflow.
    pub fn order(&self) -> Option<u128> {
        self.levels
            .iter()
            .try_fold(1u128, |acc, l| acc.checked_mul(l.orbit.len() as u128))
    }

    pub fn base_len(&self) -> usize {
        self.levels.len()
    }
}

fn first_moved(p: &[u32]) -> Option<u32> {
    p.iter()
        .enumerate()
        .find(|(i, &x)| *i as u32 != x)
        .map(|(i, _)| i as u32)
}

/// Chain for a group of signed permutations of `R^d`, with transversals
/// cached in signed-permutation form for fast application to vectors.
#[derive(Debug, Clone)]
pub struct SignedPermutationGroup {
    dim: usize,
    chain: StabilizerChain,
    transversals: Vec<Vec<SignedPermutation>>,
}

impl SignedPermutationGroup {
    pub fn new(dim: usize, generators: &[SignedPermutation]) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: g.dim(),
            });
        }
        let chain = StabilizerChain::build(2 * dim, generators.iter().map(point_perm).collect());
        let transversals = chain
            .levels
            .iter()
            .map(|l| {
                l.orbit
                    .iter()
                    .map(|&b| signed_of_point_perm(l.transversal[b as usize].as_ref().unwrap()))
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            chain,
            transversals,
        })
    }

    pub fn order(&self) -> Option<u128> {
        self.chain.order()
    }

    pub fn contains(&self, g: &SignedPermutation) -> bool {
        g.dim() == self.dim && self.chain.contains(&point_perm(g))
    }

    /// A uniformly distributed group element.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> SignedPermutation {
        let mut acc = identity_perm(2 * self.dim);
        for level in &self.chain.levels {
            let b = level.orbit[rng.random_range(0..level.orbit.len())];
            acc = compose(&acc, level.transversal[b as usize].as_ref().unwrap());
        }
        signed_of_point_perm(&acc)
    }

    /// `x <- g x` for a uniformly random `g`; `scratch` has length `d`.
    pub fn apply_random<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [T], scratch: &mut [T]) {
        // g = u_0 u_1 ... u_{m-1}: apply the deepest factor first.
        let picks: Vec<usize> = self
            .transversals
            .iter()
            .map(|t| rng.random_range(0..t.len()))
            .collect();
        for (t, &k) in self.transversals.iter().zip(&picks).rev() {
            t[k].apply_into(x, scratch);
            x.copy_from_slice(scratch);
        }
    }
}

/// Uniform sampler over the group generated by a [`GroupSpec`].
#[derive(Debug, Clone)]
pub enum GroupSampler<T> {
    SignedPermutations(SignedPermutationGroup),
    Enumerated(Vec<LinearMap<T>>),
}

impl<T: Scalar> GroupSampler<T> {
    /// Uses the stabilizer chain when every generator is a signed
    /// permutation; otherwise enumerates the group, failing when it has
    /// more than `enumeration_cap` elements.
    pub fn new(spec: &GroupSpec<T>, enumeration_cap: usize) -> Result<Self> {
        let signed: Option<Vec<SignedPermutation>> = spec
            .generators()
            .iter()
            .map(|g| g.as_signed_permutation().cloned())
            .collect();
        match signed {
            Some(gens) => Ok(Self::SignedPermutations(SignedPermutationGroup::new(
                spec.dim(),
                &gens,
            )?)),
            None => match closure(spec, enumeration_cap) {
                Ok(all) => Ok(Self::Enumerated(all)),
                Err(Error::GroupTooLarge { cap }) => Err(Error::Symmetrize(format!(
                    "group `{}` is infinite or has more than {cap} elements; use the plain bootstrap scheme",
                    spec.name()
                ))),
                Err(e) => Err(e),
            },
        }
    }

    pub fn order(&self) -> Option<u128> {
        match self {
            Self::SignedPermutations(g) => g.order(),
            Self::Enumerated(all) => Some(all.len() as u128),
        }
    }

    /// Replaces `x` by `g x` for a uniformly random group element `g`.
    pub fn apply_random<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [T], scratch: &mut [T]) {
        match self {
            Self::SignedPermutations(g) => g.apply_random(rng, x, scratch),
            Self::Enumerated(all) => {
                let g = &all[rng.random_range(0..all.len())];
                g.apply_into(x, scratch);
                x.copy_from_slice(scratch);
            }
        }
    }
}
