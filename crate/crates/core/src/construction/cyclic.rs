use num_bigint::BigInt;

use crate::circle::{mod_inverse, CircleAngle};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, UnitaryPair};

/// `c = 2·3⁻¹ mod L`. Requires `gcd(L, 6) = 1`.
pub fn cyclic_multiplier(l: u64) -> Result<u64> {
    if l == 0 || l.is_multiple_of(2) || l.is_multiple_of(3) {
        return Err(Error::InvalidArgument(format!(
            "L = {l} must be positive and coprime to 6"
        )));
    }
    if l == 1 {
        return Ok(0);
    }
    let inv3 = mod_inverse(&BigInt::from(3), &BigInt::from(l)).expect("3 is invertible mod L");
    let c = (inv3 * 2u32) % BigInt::from(l);
    Ok(u64::try_from(c).expect("reduced residue fits"))
}

/// `U e_y = e_{y+1}`, `V e_y = e_{c·y}` on `ℤ_L`.
///
/// `V⁻¹UV = U^{c⁻¹}` and `2c⁻¹ ≡ 3`, so the relation holds exactly.
pub fn cyclic_pair(l: u64) -> Result<UnitaryPair> {
    let c = cyclic_multiplier(l)?;
    let n = l as usize;
    let shift: Vec<usize> = (0..n).map(|y| (y + 1) % n).collect();
    let mult: Vec<usize> = (0..l).map(|y| ((y as u128 * c as u128) % l as u128) as usize).collect();
    UnitaryPair::new(ComplexMatrix::permutation(&shift)?, ComplexMatrix::permutation(&mult)?)
}

/// `U = diag(1, e^{2πi/5}, e^{8πi/5})`, `V` swapping the last two basis
/// vectors. Satisfies the relation exactly with `d = 3`.
pub fn pentagonal_triple() -> UnitaryPair {
    let u = ComplexMatrix::diagonal_phases(&[CircleAngle::ZERO, CircleAngle::new(0.2), CircleAngle::new(0.8)]);
    let v = ComplexMatrix::permutation(&[0, 2, 1]).expect("valid permutation");
    UnitaryPair::new(u, v).expect("unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator_defect, relation_defect};

    #[test]
    fn multipliers() {
        assert_eq!(cyclic_multiplier(5).unwrap(), 4);
        assert_eq!(cyclic_multiplier(7).unwrap(), 3);
        assert_eq!(cyclic_multiplier(25).unwrap(), 9);
        for l in [0, 2, 3, 6, 9, 12] {
            assert!(cyclic_multiplier(l).is_err());
        }
    }

    #[test]
    fn cyclic_pairs_are_exact() {
        for l in [1u64, 5, 7, 11, 13, 25, 35] {
            let p = cyclic_pair(l).unwrap();
            assert_eq!(p.dim(), l as usize);
            assert!(relation_defect(&p) <= 1e-12, "L = {l}");
            assert!(commutator_defect(&p) <= 1e-12, "L = {l}");
        }
    }

    #[test]
    fn trivial_cyclic_pair() {
        let p = cyclic_pair(1).unwrap();
        assert_eq!(p.u(), &ComplexMatrix::identity(1));
        assert_eq!(p.v(), &ComplexMatrix::identity(1));
    }

    #[test]
    fn pentagonal_is_exact() {
        let p = pentagonal_triple();
        assert!(relation_defect(&p) < 1e-14);
        assert!(commutator_defect(&p) < 1e-14);
    }
}
