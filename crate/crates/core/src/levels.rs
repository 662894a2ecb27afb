//! Angular-momentum algebra for an F → F′ transition.
//!
//! Angular momenta and magnetic quantum numbers are stored as twice their
//! value so that half-integer levels are exact integers and every selection
//! rule is an integer comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A magnetic sublevel, stored as twice its magnetic quantum number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sublevel(pub i32);

impl Sublevel {
    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }
}

impl fmt::Display for Sublevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for Sublevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_half_integer(s).map(Sublevel)
    }
}

/// Total angular momentum F, stored as 2F.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngularMomentum(i32);

impl AngularMomentum {
    pub fn from_twice(twice: i32) -> Result<Self> {
        if twice < 0 {
            return Err(Error::invalid(format!("angular momentum 2F = {twice} is negative")));
        }
        Ok(AngularMomentum(twice))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Sublevels −F, −F+1, …, F in increasing order.
    pub fn sublevels(self) -> impl Iterator<Item = Sublevel> {
        (-self.0..=self.0).step_by(2).map(Sublevel)
    }

    pub fn contains(self, m: Sublevel) -> bool {
        m.0.abs() <= self.0 && (m.0 - self.0) % 2 == 0
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Sublevel(self.0).fmt(f)
    }
}

impl FromStr for AngularMomentum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AngularMomentum::from_twice(parse_half_integer(s)?)
    }
}

/// Parses "2", "-1", "3/2", "-1/2", "+1/2" into twice the value.
fn parse_half_integer(s: &str) -> Result<i32> {
    let s = s.trim();
    let bad = || Error::invalid(format!("'{s}' is not an integer or half-integer"));
    match s.split_once('/') {
        None => s.parse::<i32>().map(|v| 2 * v).map_err(|_| bad()),
        Some((num, "2")) => {
            let n = num.trim().parse::<i32>().map_err(|_| bad())?;
            if n % 2 == 0 {
                Err(bad())
            } else {
                Ok(n)
            }
        }
        Some(_) => Err(bad()),
    }
}

/// Polarization of the cavity field relative to the quantization axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionGeometry {
    Pi,
    SigmaPlus,
    SigmaMinus,
}

impl TransitionGeometry {
    /// Spherical component q of the photon: ground m couples to excited m + q.
    pub fn q(self) -> i32 {
        match self {
            TransitionGeometry::Pi => 0,
            TransitionGeometry::SigmaPlus => 1,
            TransitionGeometry::SigmaMinus => -1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TransitionGeometry::Pi => "pi",
            TransitionGeometry::SigmaPlus => "sigma_plus",
            TransitionGeometry::SigmaMinus => "sigma_minus",
        }
    }
}

impl FromStr for TransitionGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pi" | "linear" => Ok(TransitionGeometry::Pi),
            "sigma_plus" | "sigma+" | "sigmaplus" => Ok(TransitionGeometry::SigmaPlus),
            "sigma_minus" | "sigma-" | "sigmaminus" => Ok(TransitionGeometry::SigmaMinus),
            other => {
                Err(Error::invalid(format!("unknown polarization '{other}' (expected pi, sigma_plus or sigma_minus)")))
            }
        }
    }
}

/// A ground manifold F coupled to an excited manifold F′ by a single cavity mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    ground: AngularMomentum,
    excited: AngularMomentum,
    geometry: TransitionGeometry,
    /// Single-atom coupling g₀, rad/s.
    g0: f64,
    /// Excited-state decay rate Γ, rad/s.
    gamma: f64,
}

impl LevelScheme {
    pub fn new(
        ground: AngularMomentum,
        excited: AngularMomentum,
        geometry: TransitionGeometry,
        g0: f64,
        gamma: f64,
    ) -> Result<Self> {
        if (ground.0 - excited.0).abs() > 2 {
            return Err(Error::invalid(format!(
                "|F - F'| > 1 for F = {ground}, F' = {excited}: not a dipole transition"
            )));
        }
        if ground.0 + excited.0 < 2 {
            return Err(Error::invalid("F + F' must be at least 1"));
        }
        if (ground.0 + excited.0) % 2 != 0 {
            return Err(Error::invalid(format!("F = {ground} and F' = {excited} differ by a half-integer")));
        }
        if !(g0 > 0.0 && g0.is_finite()) {
            return Err(Error::invalid(format!("g0 must be positive, got {g0}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("Gamma must be positive, got {gamma}")));
        }
        Ok(LevelScheme { ground, excited, geometry, g0, gamma })
    }

    pub fn ground(&self) -> AngularMomentum {
        self.ground
    }

    pub fn excited(&self) -> AngularMomentum {
        self.excited
    }

    pub fn geometry(&self) -> TransitionGeometry {
        self.geometry
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Exact value of the form `±√(square)` with a rational square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedSqrt {
    pub negative: bool,
    pub square: BigRational,
}

impl SignedSqrt {
    fn zero() -> Self {
        SignedSqrt { negative: false, square: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.square.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.negative {
            -mag
        } else {
            mag
        }
    }
}

fn factorial(n: i32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn check_pair(two_j: i32, two_m: i32) -> Result<()> {
    if two_j < 0 {
        return Err(Error::invalid(format!("2j = {two_j} is negative")));
    }
    if (two_j + two_m).rem_euclid(2) != 0 {
        return Err(Error::invalid(format!("j = {two_j}/2 and m = {two_m}/2 have inconsistent parity")));
    }
    if two_m.abs() > two_j {
        return Err(Error::invalid(format!("|m| = |{two_m}/2| exceeds j = {two_j}/2")));
    }
    Ok(())
}

/// Exact Clebsch–Gordan coefficient ⟨j1 m1; j2 m2 | j m⟩ (Condon–Shortley
/// phase) from the Racah sum. All arguments are twice the physical values.
pub fn clebsch_gordan_exact(
    two_j1: i32,
    two_m1: i32,
    two_j2: i32,
    two_m2: i32,
    two_j: i32,
    two_m: i32,
) -> Result<SignedSqrt> {
    check_pair(two_j1, two_m1)?;
    check_pair(two_j2, two_m2)?;
    check_pair(two_j, two_m)?;

    if two_m1 + two_m2 != two_m {
        return Ok(SignedSqrt::zero());
    }
    if (two_j1 + two_j2 + two_j) % 2 != 0 {
        return Ok(SignedSqrt::zero());
    }
    let a = (two_j1 + two_j2 - two_j) / 2;
    let b = (two_j1 - two_j2 + two_j) / 2;
    let c = (-two_j1 + two_j2 + two_j) / 2;
    if a < 0 || b < 0 || c < 0 {
        return Ok(SignedSqrt::zero());
    }
    let d = (two_j1 + two_j2 + two_j) / 2 + 1;

    let j1_minus = (two_j1 - two_m1) / 2;
    let j1_plus = (two_j1 + two_m1) / 2;
    let j2_minus = (two_j2 - two_m2) / 2;
    let j2_plus = (two_j2 + two_m2) / 2;
    let j_minus = (two_j - two_m) / 2;
    let j_plus = (two_j + two_m) / 2;

    let prefactor =
        BigRational::new(BigInt::from(two_j + 1) * factorial(a) * factorial(b) * factorial(c), factorial(d));
    let norm = factorial(j_plus)
        * factorial(j_minus)
        * factorial(j1_minus)
        * factorial(j1_plus)
        * factorial(j2_minus)
        * factorial(j2_plus);

    // Denominator terms k!, (a-k)!, (j1-m1-k)!, (j2+m2-k)!, (j-j2+m1+k)!, (j-j1-m2+k)!
    let shift1 = (two_j - two_j2 + two_m1) / 2;
    let shift2 = (two_j - two_j1 - two_m2) / 2;
    let k_min = 0.max(-shift1).max(-shift2);
    let k_max = a.min(j1_minus).min(j2_plus);

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial(j1_minus - k)
            * factorial(j2_plus - k)
            * factorial(shift1 + k)
            * factorial(shift2 + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(SignedSqrt::zero());
    }
    let negative = sum.is_negative();
    let square = prefactor * BigRational::from_integer(norm) * &sum * &sum;
    Ok(SignedSqrt { negative, square })
}

/// ⟨j1 m1; j2 m2 | j m⟩ as a float. Arguments are twice the physical values.
pub fn clebsch_gordan(two_j1: i32, two_m1: i32, two_j2: i32, two_m2: i32, two_j: i32, two_m: i32) -> Result<f64> {
    clebsch_gordan_exact(two_j1, two_m1, two_j2, two_m2, two_j, two_m).map(|v| v.to_f64())
}

/// Per-ground-sublevel couplings g_m = g₀·c_m and spontaneous-decay branching
/// ratios β_m^k for a closed transition.
///
/// Ground sublevels are held in increasing order of m; every per-level vector
/// is indexed the same way.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    g0: f64,
    gamma: f64,
    ground: Vec<Sublevel>,
    /// Excited sublevel each ground level is driven to, if any.
    partner: Vec<Option<Sublevel>>,
    cg: Vec<f64>,
    couplings: Vec<f64>,
    /// (ground m, excited k) → β_m^k. Pairs with |m − k| > 1 are absent.
    branching: BTreeMap<(Sublevel, Sublevel), f64>,
}

impl CouplingSet {
    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn ground_levels(&self) -> &[Sublevel] {
        &self.ground
    }

    pub fn index_of(&self, m: Sublevel) -> Option<usize> {
        self.ground.iter().position(|&g| g == m)
    }

    pub fn partner(&self, i: usize) -> Option<Sublevel> {
        self.partner[i]
    }

    /// Signed Clebsch–Gordan coefficients c_m, zero for uncoupled levels.
    pub fn cg(&self) -> &[f64] {
        &self.cg
    }

    /// Coupling constants g_m = g₀·c_m, rad/s.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn cg_squared(&self) -> impl Iterator<Item = f64> + '_ {
        self.cg.iter().map(|c| c * c)
    }

    /// β_m^k: probability that excited sublevel k decays to ground sublevel m.
    pub fn branching(&self, ground: Sublevel, excited: Sublevel) -> f64 {
        self.branching.get(&(ground, excited)).copied().unwrap_or(0.0)
    }

    pub fn branching_table(&self) -> &BTreeMap<(Sublevel, Sublevel), f64> {
        &self.branching
    }

    /// Excited sublevels appearing in the branching table.
    pub fn excited_levels(&self) -> Vec<Sublevel> {
        let mut ks: Vec<Sublevel> = self.branching.keys().map(|&(_, k)| k).collect();
        ks.sort();
        ks.dedup();
        ks
    }

    /// `refill[i][j]` = β for decay of the excited partner of ground level j
    /// into ground level i.
    pub fn refill_matrix(&self) -> Vec<Vec<f64>> {
        self.ground
            .iter()
            .map(|&m| self.partner.iter().map(|p| p.map_or(0.0, |k| self.branching(m, k))).collect())
            .collect()
    }
}

/// Couplings and branching ratios for a closed F → F′ = F + 1 transition.
pub fn coupling_set(scheme: &LevelScheme) -> Result<CouplingSet> {
    let fg = scheme.ground;
    let fe = scheme.excited;
    if fe.0 != fg.0 + 2 {
        return Err(Error::Unsupported(format!(
            "open transition F = {fg} -> F' = {fe}; only closed F -> F+1 transitions are modelled"
        )));
    }
    let two_q = 2 * scheme.geometry.q();

    let mut ground = Vec::new();
    let mut partner = Vec::new();
    let mut cg = Vec::new();
    for m in fg.sublevels() {
        let k = Sublevel(m.0 + two_q);
        if fe.contains(k) {
            ground.push(m);
            partner.push(Some(k));
            cg.push(clebsch_gordan(fg.0, m.0, 2, two_q, fe.0, k.0)?);
        } else {
            ground.push(m);
            partner.push(None);
            cg.push(0.0);
        }
    }

    let mut branching = BTreeMap::new();
    for k in fe.sublevels() {
        for m in fg.sublevels() {
            let dq = k.0 - m.0;
            if dq.abs() <= 2 {
                let c = clebsch_gordan_exact(fg.0, m.0, 2, dq, fe.0, k.0)?;
                branching.insert((m, k), c.square.to_f64().unwrap_or(f64::NAN));
            }
        }
    }

    let couplings = cg.iter().map(|c| scheme.g0 * c).collect();
    Ok(CouplingSet { g0: scheme.g0, gamma: scheme.gamma, ground, partner, cg, couplings, branching })
}

/// Two ground states m = ∓1/2 driven on σ⁺ transitions with free squared
/// coupling coefficients.
///
/// Each excited state decays into m = +1/2, so population leaves m = −1/2
/// only through the driven transition and m = +1/2 is a closed cycling
/// transition.
pub fn two_transition_scheme(c_minus_sq: f64, c_plus_sq: f64, g0: f64, gamma: f64) -> Result<CouplingSet> {
    for (name, v) in [("c_minus_sq", c_minus_sq), ("c_plus_sq", c_plus_sq)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(format!("{name} must lie in (0, 1], got {v}")));
        }
    }
    if !(g0 > 0.0 && g0.is_finite()) {
        return Err(Error::invalid(format!("g0 must be positive, got {g0}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("Gamma must be positive, got {gamma}")));
    }
    let minus = Sublevel(-1);
    let plus = Sublevel(1);
    let e_minus = Sublevel(1);
    let e_plus = Sublevel(3);
    let cg = vec![c_minus_sq.sqrt(), c_plus_sq.sqrt()];
    let mut branching = BTreeMap::new();
    branching.insert((minus, e_minus), 0.0);
    branching.insert((plus, e_minus), 1.0);
    branching.insert((plus, e_plus), 1.0);
    Ok(CouplingSet {
        g0,
        gamma,
        ground: vec![minus, plus],
        partner: vec![Some(e_minus), Some(e_plus)],
        couplings: cg.iter().map(|c| g0 * c).collect(),
        cg,
        branching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent construction of coupled states: start from the stretched
    /// state, apply J₋, and Gram–Schmidt each new highest-weight state
    /// against the already-built multiplets. Returns ⟨j1 m1; j2 m2 | J M⟩.
    fn cg_by_lowering(two_j1: i32, two_j2: i32) -> BTreeMap<(i32, i32, i32, i32), f64> {
        let basis: Vec<(i32, i32)> = (-two_j1..=two_j1)
            .step_by(2)
            .flat_map(|m1| (-two_j2..=two_j2).step_by(2).map(move |m2| (m1, m2)))
            .collect();
        let idx = |m1: i32, m2: i32| basis.iter().position(|&b| b == (m1, m2)).unwrap();
        let lower_coeff = |two_j: i32, two_m: i32| {
            let j = f64::from(two_j) / 2.0;
            let m = f64::from(two_m) / 2.0;
            (j * (j + 1.0) - m * (m - 1.0)).sqrt()
        };
        let lower = |v: &Vec<f64>| {
            let mut out = vec![0.0; basis.len()];
            for (i, &(m1, m2)) in basis.iter().enumerate() {
                if v[i] == 0.0 {
                    continue;
                }
                if m1 > -two_j1 {
                    out[idx(m1 - 2, m2)] += lower_coeff(two_j1, m1) * v[i];
                }
                if m2 > -two_j2 {
                    out[idx(m1, m2 - 2)] += lower_coeff(two_j2, m2) * v[i];
                }
            }
            out
        };
        let mut states: BTreeMap<(i32, i32), Vec<f64>> = BTreeMap::new();
        let mut two_big_j = two_j1 + two_j2;
        while two_big_j >= (two_j1 - two_j2).abs() {
            // Highest state |J J⟩: orthogonal to all |J' J⟩ with J' > J.
            let mut v = vec![0.0; basis.len()];
            let m_total = two_big_j;
            let candidates: Vec<usize> =
                basis.iter().enumerate().filter(|(_, &(a, b))| a + b == m_total).map(|(i, _)| i).collect();
            for &i in &candidates {
                v[i] = 1.0 + i as f64 * 0.37;
            }
            for ((_, mm), w) in states.iter() {
                if *mm == m_total {
                    let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                    for (x, y) in v.iter_mut().zip(w) {
                        *x -= dot * y;
                    }
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            // Condon–Shortley: ⟨j1 j1; j2 (J - j1) | J J⟩ > 0.
            let m2 = two_big_j - two_j1;
            let phase_idx = if m2.abs() <= two_j2 { idx(two_j1, m2) } else { unreachable!() };
            if v[phase_idx] < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
            let mut two_m = two_big_j;
            loop {
                states.insert((two_big_j, two_m), v.clone());
                if two_m == -two_big_j {
                    break;
                }
                let mut w = lower(&v);
                let c = lower_coeff(two_big_j, two_m);
                for x in w.iter_mut() {
                    *x /= c;
                }
                v = w;
                two_m -= 2;
            }
            two_big_j -= 2;
        }
        let mut out = BTreeMap::new();
        for ((two_j, two_m), v) in states {
            for (i, &(m1, m2)) in basis.iter().enumerate() {
                out.insert((two_j, two_m, m1, m2), v[i]);
            }
        }
        out
    }

    #[test]
    fn racah_matches_lowering_construction() {
        for two_j1 in 0..=6 {
            for two_j2 in 0..=4 {
                let table = cg_by_lowering(two_j1, two_j2);
                for (&(two_j, two_m, m1, m2), &expected) in &table {
                    let got = clebsch_gordan(two_j1, m1, two_j2, m2, two_j, two_m).unwrap();
                    let expected = if m1 + m2 == two_m { expected } else { 0.0 };
                    assert!(
                        (got - expected).abs() < 1e-12,
                        "<{two_j1}/2 {m1}/2; {two_j2}/2 {m2}/2 | {two_j}/2 {two_m}/2>: {got} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn worked_values() {
        let v = clebsch_gordan_exact(4, 0, 2, 0, 6, 0).unwrap();
        assert!(!v.negative);
        assert_eq!(v.square, rational(3, 5));
        assert!((v.to_f64() - 0.774_596_669_241_483_4).abs() < 1e-15);

        assert_eq!(clebsch_gordan(4, 4, 2, 2, 6, 6).unwrap(), 1.0);
        assert_eq!(clebsch_gordan(4, 0, 2, 2, 6, 0).unwrap(), 0.0);
        // Triangle violation.
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 6, 0).unwrap(), 0.0);
        // Condon–Shortley sign: <1 1; 1 -1 | 1 0> = +1/√2, <1 -1; 1 1 | 1 0> = -1/√2.
        assert!((clebsch_gordan(2, 2, 2, -2, 2, 0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, -2, 2, 2, 2, 0).unwrap() + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn argument_errors() {
        assert!(matches!(clebsch_gordan(4, 1, 2, 0, 6, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(clebsch_gordan(4, 6, 2, 0, 6, 6), Err(Error::InvalidArgument(_))));
        assert!(matches!(clebsch_gordan(-2, 0, 2, 0, 2, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn half_integer_parsing() {
        assert_eq!("3/2".parse::<AngularMomentum>().unwrap().twice(), 3);
        assert_eq!("2".parse::<AngularMomentum>().unwrap().twice(), 4);
        assert_eq!("-1/2".parse::<Sublevel>().unwrap(), Sublevel(-1));
        assert!("2/2".parse::<Sublevel>().is_err());
        assert!("1/3".parse::<Sublevel>().is_err());
        assert_eq!(Sublevel(-1).to_string(), "-1/2");
        assert_eq!(Sublevel(4).to_string(), "2");
    }

    fn f2_to_f3(geometry: TransitionGeometry) -> CouplingSet {
        let scheme = LevelScheme::new(
            AngularMomentum::from_twice(4).unwrap(),
            AngularMomentum::from_twice(6).unwrap(),
            geometry,
            1.0,
            1.0,
        )
        .unwrap();
        coupling_set(&scheme).unwrap()
    }

    #[test]
    fn f2_f3_pi_coefficients() {
        let set = f2_to_f3(TransitionGeometry::Pi);
        let expected = [1.0 / 3.0, 8.0 / 15.0, 3.0 / 5.0, 8.0 / 15.0, 1.0 / 3.0];
        for (c2, e) in set.cg_squared().zip(expected) {
            assert!((c2 - e).abs() < 1e-15);
        }
        // (-1)^(Fg + 1 - Fe) = +1, so c_m = c_{-m} here.
        let cg = set.cg();
        assert!((cg[0] - cg[4]).abs() < 1e-15);
        assert!((cg[1] - cg[3]).abs() < 1e-15);
        assert!(cg.iter().all(|&c| c > 0.0));
    }

    #[test]
    fn f2_f3_branching() {
        let set = f2_to_f3(TransitionGeometry::Pi);
        let b = |m: i32, k: i32| set.branching(Sublevel(2 * m), Sublevel(2 * k));
        assert!((b(0, 0) - 0.6).abs() < 1e-15);
        assert!((b(-1, 0) - 0.2).abs() < 1e-15);
        assert!((b(1, 0) - 0.2).abs() < 1e-15);
        assert_eq!(b(2, 0), 0.0);
        assert_eq!(b(2, 3), 1.0);
    }

    #[test]
    fn sigma_plus_half_to_three_halves() {
        let scheme = LevelScheme::new(
            AngularMomentum::from_twice(1).unwrap(),
            AngularMomentum::from_twice(3).unwrap(),
            TransitionGeometry::SigmaPlus,
            2.0,
            1.0,
        )
        .unwrap();
        let set = coupling_set(&scheme).unwrap();
        let c2: Vec<f64> = set.cg_squared().collect();
        assert!((c2[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((c2[1] - 1.0).abs() < 1e-15);
        assert_eq!(set.partner(0), Some(Sublevel(1)));
        assert!((set.couplings()[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_minus_partners_shift_down() {
        let set = f2_to_f3(TransitionGeometry::SigmaMinus);
        assert_eq!(set.partner(0), Some(Sublevel(-6)));
        assert_eq!(set.partner(4), Some(Sublevel(2)));
    }

    #[test]
    fn rejects_open_and_invalid_schemes() {
        let f = |t| AngularMomentum::from_twice(t).unwrap();
        let open = LevelScheme::new(f(4), f(4), TransitionGeometry::Pi, 1.0, 1.0).unwrap();
        assert!(matches!(coupling_set(&open), Err(Error::Unsupported(_))));
        let down = LevelScheme::new(f(4), f(2), TransitionGeometry::Pi, 1.0, 1.0).unwrap();
        assert!(matches!(coupling_set(&down), Err(Error::Unsupported(_))));
        assert!(LevelScheme::new(f(0), f(6), TransitionGeometry::Pi, 1.0, 1.0).is_err());
        assert!(LevelScheme::new(f(0), f(0), TransitionGeometry::Pi, 1.0, 1.0).is_err());
        assert!(LevelScheme::new(f(1), f(2), TransitionGeometry::Pi, 1.0, 1.0).is_err());
        assert!(LevelScheme::new(f(4), f(6), TransitionGeometry::Pi, 0.0, 1.0).is_err());
        assert!(LevelScheme::new(f(4), f(6), TransitionGeometry::Pi, 1.0, -1.0).is_err());
    }

    #[test]
    fn two_transition_values() {
        let set = two_transition_scheme(1.0 / 3.0, 1.0, 3.0, 1.0).unwrap();
        assert!((set.couplings()[0] - 3.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((set.couplings()[1] - 3.0).abs() < 1e-15);
        for k in set.excited_levels() {
            let total: f64 = set.ground_levels().iter().map(|&m| set.branching(m, k)).sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
        assert!(two_transition_scheme(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(two_transition_scheme(0.5, 1.5, 1.0, 1.0).is_err());
        assert!(two_transition_scheme(0.5, 0.5, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn closed_transition_branching_sums_to_one(two_fg in 0i32..=10, q in -1i32..=1) {
            let geometry = match q { 0 => TransitionGeometry::Pi, 1 => TransitionGeometry::SigmaPlus, _ => TransitionGeometry::SigmaMinus };
            let scheme = LevelScheme::new(
                AngularMomentum::from_twice(two_fg).unwrap(),
                AngularMomentum::from_twice(two_fg + 2).unwrap(),
                geometry, 1.0, 1.0).unwrap();
            let set = coupling_set(&scheme).unwrap();
            for k in set.excited_levels() {
                let total: f64 = set.ground_levels().iter().map(|&m| set.branching(m, k)).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
            for (&(m, k), &b) in set.branching_table() {
                prop_assert!((0.0..=1.0).contains(&b));
                prop_assert!((m.0 - k.0).abs() <= 2);
            }
            for c in set.cg() {
                prop_assert!(c.abs() <= 1.0);
            }
            let c2: Vec<f64> = set.cg_squared().collect();
            if q == 0 {
                for i in 0..c2.len() {
                    prop_assert!((c2[i] - c2[c2.len() - 1 - i]).abs() < 1e-14);
                }
            }
        }
    }
}
