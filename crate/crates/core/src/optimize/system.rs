//! Independence systems: uniform, partition and explicit matroids, and
//! arbitrary downward-closed families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::{self, GroundSet, Mask};

/// Common interface of the systems used by the optimizers.
pub trait IndependenceSystem: Send + Sync {
    fn n(&self) -> usize;
    fn is_independent(&self, s: Mask) -> bool;
    /// Size of a largest independent subset of `s`.
    fn rank_of(&self, s: Mask) -> usize;
    /// Whether the exchange axiom holds (greedy is optimal).
    fn is_matroid(&self) -> bool;
    /// Inclusion-maximal independent sets, in increasing mask order.
    fn maximal_sets(&self) -> Vec<Mask>;

    fn rank(&self) -> usize {
        self.rank_of(set::full_mask(self.n()))
    }

    fn is_maximal(&self, s: Mask) -> bool {
        self.is_independent(s)
            && (0..self.n()).all(|i| set::contains(s, i) || !self.is_independent(s | 1 << i))
    }

    /// A maximal independent set maximizing `Σ_{i∈S} w_i`. Matroids run the
    /// greedy algorithm on weights sorted decreasingly (ties to the lowest
    /// index); other systems scan their maximal sets (ties to the lowest mask).
    fn linear_oracle<T: Scalar>(&self, w: &[T]) -> Mask
    where
        Self: Sized,
    {
        if self.is_matroid() {
            let mut order: Vec<usize> = (0..self.n()).collect();
            order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            let mut s: Mask = 0;
            for i in order {
                if self.is_independent(s | 1 << i) {
                    s |= 1 << i;
                }
            }
            s
        } else {
            let mut best: Option<(Mask, T)> = None;
            for m in self.maximal_sets() {
                let v = crate::scalar::sum(set::elements(m).map(|i| w[i].clone()));
                if best.as_ref().map_or(true, |(_, b)| v > *b) {
                    best = Some((m, v));
                }
            }
            best.map_or(0, |(m, _)| m)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Matroid {
    Uniform { n: usize, k: usize },
    /// `blocks` partition the ground set; at most `caps[b]` elements of block `b`.
    Partition { n: usize, blocks: Vec<Mask>, caps: Vec<usize> },
    Explicit(ExplicitFamily),
}

/// Dense independence table for an explicitly listed family.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitFamily {
    n: usize,
    independent: Vec<bool>,
    rank: Vec<u8>,
}

impl ExplicitFamily {
    /// Downward closure of `generators`.
    fn closure_of(n: usize, generators: &[Mask]) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let mut independent = vec![false; ground.size()];
        independent[0] = true;
        for &g in generators {
            if g & !ground.full() != 0 {
                return Err(Error::InvalidSystem(format!("set {g:#b} is outside the ground set")));
            }
            for sub in set::submasks(g) {
                independent[sub as usize] = true;
            }
        }
        Ok(Self::from_table(n, independent))
    }

    /// The family exactly as listed; must contain ∅ and be downward closed.
    fn exactly(n: usize, sets: &[Mask]) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let mut independent = vec![false; ground.size()];
        for &s in sets {
            if s & !ground.full() != 0 {
                return Err(Error::InvalidSystem(format!("set {s:#b} is outside the ground set")));
            }
            independent[s as usize] = true;
        }
        if !independent[0] {
            return Err(Error::InvalidSystem("family must contain the empty set".into()));
        }
        for m in 0..ground.size() {
            if independent[m] && set::elements(m as Mask).any(|i| !independent[m & !(1 << i)]) {
                return Err(Error::InvalidSystem(format!("family is not downward closed at {}", set::display(m as Mask))));
            }
        }
        Ok(Self::from_table(n, independent))
    }

    fn from_table(n: usize, independent: Vec<bool>) -> Self {
        let mut rank = vec![0u8; independent.len()];
        for m in 1..independent.len() {
            rank[m] = if independent[m] {
                set::popcount(m as Mask) as u8
            } else {
                set::elements(m as Mask).map(|i| rank[m & !(1 << i)]).max().unwrap_or(0)
            };
        }
        Self { n, independent, rank }
    }

    fn members(&self) -> Vec<Mask> {
        (0..self.independent.len()).filter(|&m| self.independent[m]).map(|m| m as Mask).collect()
    }

    /// Augmentation: for independent `I`, `J` with `|I| < |J|` some `j ∈ J ∖ I`
    /// extends `I`. Equivalent to every set's maximal independent subsets
    /// having equal size, which is what the rank table measures.
    fn satisfies_exchange(&self) -> bool {
        (0..self.independent.len()).all(|m| {
            let r = self.rank[m];
            // every maximal independent subset of m must have size r
            set::submasks(m as Mask).filter(|&s| self.independent[s as usize]).all(|s| {
                let maximal_in_m = set::elements(m as Mask & !s).all(|i| !self.independent[(s | 1 << i) as usize]);
                !maximal_in_m || set::popcount(s) as u8 == r
            })
        })
    }
}

impl Matroid {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        GroundSet::new(n)?;
        Ok(Matroid::Uniform { n, k: k.min(n) })
    }

    pub fn partition(n: usize, blocks: Vec<Mask>, caps: Vec<usize>) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if blocks.len() != caps.len() {
            return Err(Error::InvalidSystem("one capacity per block required".into()));
        }
        let mut seen: Mask = 0;
        for &b in &blocks {
            if b & seen != 0 || b & !ground.full() != 0 {
                return Err(Error::InvalidSystem("blocks must be disjoint subsets of the ground set".into()));
            }
            seen |= b;
        }
        if seen != ground.full() {
            return Err(Error::InvalidSystem("blocks must cover the ground set".into()));
        }
        Ok(Matroid::Partition { n, blocks, caps })
    }

    /// Downward closure of `sets`, validated against the exchange axiom.
    pub fn explicit(n: usize, sets: &[Mask]) -> Result<Self> {
        let fam = ExplicitFamily::exactly(n, sets)?;
        if !fam.satisfies_exchange() {
            return Err(Error::InvalidSystem("family violates the matroid exchange axiom".into()));
        }
        Ok(Matroid::Explicit(fam))
    }

    pub fn is_uniform_or_partition(&self) -> bool {
        !matches!(self, Matroid::Explicit(_))
    }
}

impl IndependenceSystem for Matroid {
    fn n(&self) -> usize {
        match self {
            Matroid::Uniform { n, .. } | Matroid::Partition { n, .. } => *n,
            Matroid::Explicit(f) => f.n,
        }
    }

    fn is_independent(&self, s: Mask) -> bool {
        if s & !set::full_mask(self.n()) != 0 {
            return false;
        }
        match self {
            Matroid::Uniform { k, .. } => set::popcount(s) <= *k,
            Matroid::Partition { blocks, caps, .. } => {
                blocks.iter().zip(caps).all(|(&b, &c)| set::popcount(s & b) <= c)
            }
            Matroid::Explicit(f) => f.independent[s as usize],
        }
    }

    fn rank_of(&self, s: Mask) -> usize {
        match self {
            Matroid::Uniform { k, .. } => set::popcount(s).min(*k),
            Matroid::Partition { blocks, caps, .. } => {
                blocks.iter().zip(caps).map(|(&b, &c)| set::popcount(s & b).min(c)).sum()
            }
            Matroid::Explicit(f) => f.rank[s as usize] as usize,
        }
    }

    fn is_matroid(&self) -> bool {
        true
    }

    fn maximal_sets(&self) -> Vec<Mask> {
        let r = self.rank();
        (0..=set::full_mask(self.n())).filter(|&m| set::popcount(m) == r && self.is_independent(m)).collect()
    }
}

/// A downward-closed family given by generators (its maximal sets need not
/// have equal size).
#[derive(Debug, Clone, PartialEq)]
pub struct SetSystem {
    family: ExplicitFamily,
    maximal: Vec<Mask>,
    matroid: bool,
}

impl SetSystem {
    /// Downward closure of `generators`.
    pub fn from_generators(n: usize, generators: &[Mask]) -> Result<Self> {
        let family = ExplicitFamily::closure_of(n, generators)?;
        Ok(Self::wrap(family))
    }

    fn wrap(family: ExplicitFamily) -> Self {
        let matroid = family.satisfies_exchange();
        let members = family.members();
        let maximal = members
            .iter()
            .copied()
            .filter(|&m| (0..family.n).all(|i| set::contains(m, i) || !family.independent[(m | 1 << i) as usize]))
            .collect();
        Self { family, maximal, matroid }
    }

    pub fn members(&self) -> Vec<Mask> {
        self.family.members()
    }
}

impl IndependenceSystem for SetSystem {
    fn n(&self) -> usize {
        self.family.n
    }

    fn is_independent(&self, s: Mask) -> bool {
        (s as usize) < self.family.independent.len() && self.family.independent[s as usize]
    }

    fn rank_of(&self, s: Mask) -> usize {
        self.family.rank[s as usize] as usize
    }

    fn is_matroid(&self) -> bool {
        self.matroid
    }

    fn maximal_sets(&self) -> Vec<Mask> {
        self.maximal.clone()
    }
}

/// Any supported system, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub enum System {
    Matroid(Matroid),
    Family(SetSystem),
}

impl System {
    pub fn as_matroid(&self) -> Option<&Matroid> {
        match self {
            System::Matroid(m) => Some(m),
            System::Family(_) => None,
        }
    }
}

impl From<Matroid> for System {
    fn from(m: Matroid) -> Self {
        System::Matroid(m)
    }
}

impl From<SetSystem> for System {
    fn from(s: SetSystem) -> Self {
        System::Family(s)
    }
}

impl IndependenceSystem for System {
    fn n(&self) -> usize {
        match self {
            System::Matroid(m) => m.n(),
            System::Family(s) => s.n(),
        }
    }
    fn is_independent(&self, s: Mask) -> bool {
        match self {
            System::Matroid(m) => m.is_independent(s),
            System::Family(f) => f.is_independent(s),
        }
    }
    fn rank_of(&self, s: Mask) -> usize {
        match self {
            System::Matroid(m) => m.rank_of(s),
            System::Family(f) => f.rank_of(s),
        }
    }
    fn is_matroid(&self) -> bool {
        match self {
            System::Matroid(_) => true,
            System::Family(f) => f.is_matroid(),
        }
    }
    fn maximal_sets(&self) -> Vec<Mask> {
        match self {
            System::Matroid(m) => m.maximal_sets(),
            System::Family(f) => f.maximal_sets(),
        }
    }
}

/// `{"variant":"uniform","n","k"}`, `{"variant":"partition","blocks":[[..]],"caps":[..]}`,
/// `{"variant":"explicit","sets":[masks]}` (a matroid, listed in full) or
/// `{"variant":"family","sets":[masks]}` (downward closure of the masks).
/// `n` is optional where it can be inferred.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemJson {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Mask>>,
}

fn missing(field: &str, variant: &str) -> Error {
    Error::Parse(format!("system.{field}: required for variant `{variant}`"))
}

fn inferred_n(sets: &[Mask]) -> usize {
    sets.iter().map(|&m| 32 - m.leading_zeros() as usize).max().unwrap_or(0)
}

impl TryFrom<SystemJson> for System {
    type Error = Error;

    fn try_from(j: SystemJson) -> Result<Self> {
        let v = j.variant.as_str();
        match v {
            "uniform" => {
                let n = j.n.ok_or_else(|| missing("n", v))?;
                let k = j.k.ok_or_else(|| missing("k", v))?;
                Ok(Matroid::uniform(n, k)?.into())
            }
            "partition" => {
                let blocks = j.blocks.ok_or_else(|| missing("blocks", v))?;
                let caps = j.caps.ok_or_else(|| missing("caps", v))?;
                let n = j.n.unwrap_or_else(|| blocks.iter().flatten().map(|&i| i + 1).max().unwrap_or(0));
                let masks = blocks
                    .iter()
                    .map(|b| {
                        b.iter().try_fold(0 as Mask, |m, &i| {
                            if i >= n {
                                Err(Error::Parse(format!("system.blocks: element {i} outside ground set of size {n}")))
                            } else {
                                Ok(m | 1 << i)
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Matroid::partition(n, masks, caps)?.into())
            }
            "explicit" => {
                let sets = j.sets.ok_or_else(|| missing("sets", v))?;
                let n = j.n.unwrap_or_else(|| inferred_n(&sets));
                Ok(Matroid::explicit(n, &sets)?.into())
            }
            "family" => {
                let sets = j.sets.ok_or_else(|| missing("sets", v))?;
                let n = j.n.unwrap_or_else(|| inferred_n(&sets));
                Ok(SetSystem::from_generators(n, &sets)?.into())
            }
            other => Err(Error::Parse(format!(
                "system.variant: unknown `{other}` (expected uniform, partition, explicit or family)"
            ))),
        }
    }
}

impl From<System> for SystemJson {
    fn from(s: System) -> Self {
        let blank = |variant: &str, n: usize| SystemJson {
            variant: variant.into(),
            n: Some(n),
            k: None,
            blocks: None,
            caps: None,
            sets: None,
        };
        match s {
            System::Matroid(Matroid::Uniform { n, k }) => SystemJson { k: Some(k), ..blank("uniform", n) },
            System::Matroid(Matroid::Partition { n, blocks, caps }) => SystemJson {
                blocks: Some(blocks.iter().map(|&b| set::elements(b).collect()).collect()),
                caps: Some(caps),
                ..blank("partition", n)
            },
            System::Matroid(Matroid::Explicit(f)) => SystemJson { sets: Some(f.members()), ..blank("explicit", f.n) },
            System::Family(f) => SystemJson { sets: Some(f.maximal_sets()), ..blank("family", f.n()) },
        }
    }
}
