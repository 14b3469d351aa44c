use std::collections::BTreeSet;

use itertools::Itertools;

use crate::single_peaked::is_single_peaked;
use crate::types::{OrdinalAxis, Profile};

use super::SpverifyError;

pub const DEFAULT_AXIS_CAP: usize = 8;

/// Every axis, in canonical orientation, on which all votes are single-peaked.
pub fn find_consistent_axes_bruteforce(
    profile: &Profile,
    cap: usize,
) -> Result<BTreeSet<OrdinalAxis>, SpverifyError> {
    let m = profile.alternatives();
    if m > cap {
        return Err(SpverifyError::CapExceeded {
            what: "alternatives",
            value: m,
            cap,
        });
    }
    let mut found = BTreeSet::new();
    for perm in (0..m).permutations(m) {
        // the lexicographically smaller orientation starts below where it ends
        if m > 1 && perm[0] > perm[m - 1] {
            continue;
        }
        let axis = OrdinalAxis::from_indices(&perm).expect("permutation");
        let consistent = profile
            .votes()
            .iter()
            .all(|v| is_single_peaked(v, &axis).expect("sizes checked by Profile"));
        if consistent {
            found.insert(axis);
        }
    }
    Ok(found)
}
