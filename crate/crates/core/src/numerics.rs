//! Supporting numerics: adaptive Gauss-Kronrod quadrature, binomial
//! coefficients, integer partitions and central finite differences.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// 7-point Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> Default for QuadratureSpec<T> {
    /// abs 1e-10, rel 1e-8, 2000 subdivisions; tolerances are floored at a
    /// small multiple of machine epsilon so `f32` evaluation stays reachable.
    fn default() -> Self {
        let floor = T::epsilon() * T::lit(64.0);
        QuadratureSpec {
            abs_tol: T::lit(1e-10).max(floor),
            rel_tol: T::lit(1e-8).max(floor),
            max_subdivisions: 2000,
        }
    }
}

impl<T: Scalar> QuadratureSpec<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > T::zero()) || !(rel_tol > T::zero()) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Scalar> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Segment<T> {}

impl<T: Scalar> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gauss_kronrod_15<T, F>(f: &mut F, a: T, b: T) -> Segment<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;

    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]` by globally adaptive 7/15-point
/// Gauss-Kronrod subdivision.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * |result|)`. Running out of subdivisions yields
/// [`Error::Quadrature`] carrying the best estimate and its error bound.
pub fn integrate<T, F>(mut f: F, a: T, b: T, spec: &QuadratureSpec<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(a < b) {
        return Err(Error::Domain(format!(
            "integration interval must satisfy a < b (got a = {a}, b = {b})"
        )));
    }

    let first = gauss_kronrod_15(&mut f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Domain("integrand is not finite on the interval".into()));
    }
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = (worst.a + worst.b) / T::lit(2.0);
        if !(worst.a < mid && mid < worst.b) {
            // interval cannot be split further at this precision
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_15(&mut f, worst.a, mid);
        let right = gauss_kronrod_15(&mut f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    // re-sum to shed accumulated cancellation from incremental updates
    let (value, error) = heap
        .iter()
        .fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
    if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
        return Ok(value);
    }
    Err(Error::Quadrature {
        estimate: value.to_f64_lossy(),
        error_bound: error.to_f64_lossy(),
        subdivisions,
    })
}

/// A partition of a non-negative integer, stored as part size -> count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntegerPartition {
    multiplicities: BTreeMap<usize, usize>,
}

impl IntegerPartition {
    pub fn multiplicities(&self) -> &BTreeMap<usize, usize> {
        &self.multiplicities
    }

    /// The integer being partitioned, `sum(l * c_l)`.
    pub fn total(&self) -> usize {
        self.multiplicities.iter().map(|(l, c)| l * c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplicities.is_empty()
    }

    /// Iterates `(part size, count)` in ascending part size.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.multiplicities.iter().map(|(&l, &c)| (l, c))
    }
}

/// All partitions of `k`, each exactly once. `k = 0` yields the empty partition.
pub fn partitions_of(k: usize) -> Vec<IntegerPartition> {
    fn recurse(
        remaining: usize,
        max_part: usize,
        current: &mut BTreeMap<usize, usize>,
        out: &mut Vec<IntegerPartition>,
    ) {
        if remaining == 0 {
            out.push(IntegerPartition {
                multiplicities: current.clone(),
            });
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            *current.entry(part).or_insert(0) += 1;
            recurse(remaining - part, part, current, out);
            match current.get_mut(&part) {
                Some(c) if *c > 1 => *c -= 1,
                _ => {
                    current.remove(&part);
                }
            }
        }
    }

    let mut out = Vec::new();
    recurse(k, k, &mut BTreeMap::new(), &mut out);
    out
}

/// `n!` as a scalar; exact in `f64` up to 22!.
pub fn factorial<T: Scalar>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::from_count(i))
}

const EXACT_BINOM_LIMIT: u64 = 60;

/// Binomial coefficient `C(n, r)`.
///
/// Exact integer arithmetic for `n <= 60`, log-gamma beyond.
pub fn binom<T: Scalar>(n: u64, r: u64) -> Result<T> {
    if r > n {
        return Err(Error::Domain(format!(
            "binom requires r <= n (got n = {n}, r = {r})"
        )));
    }
    let r = r.min(n - r);
    if n <= EXACT_BINOM_LIMIT {
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc * u128::from(n - i) / u128::from(i + 1);
        }
        return T::from_u128(acc).ok_or_else(|| Error::Domain(format!("C({n}, {r}) not representable")));
    }
    use statrs::function::gamma::ln_gamma;
    let (nf, rf) = (n as f64, r as f64);
    let log = ln_gamma(nf + 1.0) - ln_gamma(rf + 1.0) - ln_gamma(nf - rf + 1.0);
    Ok(T::lit(log.exp()))
}

/// Central finite-difference estimate of the `order`-th derivative of `f`
/// at `x`, Richardson-extrapolated over steps `step` and `step / 2`.
///
/// Meant as a test oracle; accuracy is roughly `O(step^4)` plus
/// `O(noise / step^order)` and is not guaranteed.
pub fn derivative_high_order<T, F>(mut f: F, x: T, order: usize, step: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if order > 6 {
        return Err(Error::Domain(format!("derivative order {order} exceeds 6")));
    }
    if !(step > T::zero()) {
        return Err(Error::Domain("finite-difference step must be positive".into()));
    }
    if order == 0 {
        return Ok(f(x));
    }
    let coarse = central_difference(&mut f, x, order, step)?;
    let fine = central_difference(&mut f, x, order, step / T::lit(2.0))?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

// Second-order accurate central difference. Even orders use delta^n, odd
// orders average delta^n at x +- h/2, so every sample lands on the integer
// grid x + j*h.
fn central_difference<T, F>(f: &mut F, x: T, order: usize, h: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let n = order as i64;
    let mut weights: BTreeMap<i64, T> = BTreeMap::new();
    let mut add = |offset2: i64, w: T| {
        // offset2 is twice the grid offset
        debug_assert!(offset2 % 2 == 0);
        let e = weights.entry(offset2 / 2).or_insert(T::zero());
        *e = *e + w;
    };
    for j in 0..=n {
        let c: T = binom(order as u64, j as u64)?;
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        if n % 2 == 0 {
            add(n - 2 * j, sign * c);
        } else {
            let half = T::lit(0.5);
            add(n - 2 * j + 1, sign * c * half);
            add(n - 2 * j - 1, sign * c * half);
        }
    }
    let sum = weights.into_iter().fold(T::zero(), |acc, (k, w)| {
        if w == T::zero() {
            acc
        } else {
            acc + w * f(x + T::lit(k as f64) * h)
        }
    });
    Ok(sum / h.powi(order as i32))
}
