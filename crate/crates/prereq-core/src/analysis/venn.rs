//! Venn region computation for two or three tag sets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::graph::TagSet;

/// Identifies one exclusive region of a 2- or 3-set Venn diagram as the
/// exact combination of input sets a tag belongs to. Encoded as the set
/// letters, e.g. `"A"` (only the first set), `"AC"` (first and third, not
/// second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct RegionSignature {
    mask: u8,
    set_count: u8,
}

impl RegionSignature {
    pub fn new(mask: u8, set_count: u8) -> Self {
        RegionSignature { mask, set_count }
    }

    pub fn contains(&self, set_idx: usize) -> bool {
        self.mask & (1 << set_idx) != 0
    }

    /// Number of input sets this region lies inside.
    pub fn member_count(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn label(&self) -> String {
        (0..self.set_count as usize)
            .filter(|&i| self.contains(i))
            .map(|i| char::from(b'A' + i as u8))
            .collect()
    }
}

impl fmt::Display for RegionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<RegionSignature> for String {
    fn from(sig: RegionSignature) -> String {
        sig.label()
    }
}

impl TryFrom<String> for RegionSignature {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        let mut mask = 0u8;
        let mut max = 0u8;
        for c in s.chars() {
            let idx = (c as u32)
                .checked_sub('A' as u32)
                .filter(|&i| i < 3)
                .ok_or_else(|| format!("invalid region letter '{c}'"))? as u8;
            mask |= 1 << idx;
            max = max.max(idx + 1);
        }
        if mask == 0 {
            return Err("empty region signature".to_string());
        }
        Ok(RegionSignature {
            mask,
            set_count: max.max(2),
        })
    }
}

/// Partitions the union of 2 or 3 tag sets into exclusive regions.
///
/// Every signature (3 for two sets, 7 for three) is present in the result,
/// empty regions included; every tag of the union appears in exactly one
/// region.
pub fn venn_regions(sets: &[TagSet]) -> Result<BTreeMap<RegionSignature, TagSet>, AnalysisError> {
    let count = sets.len();
    if !(2..=3).contains(&count) {
        return Err(AnalysisError::UnsupportedSetCount { count });
    }

    let mut regions: BTreeMap<RegionSignature, TagSet> = BTreeMap::new();
    for mask in 1u8..(1 << count) {
        regions.insert(RegionSignature::new(mask, count as u8), TagSet::new());
    }

    let mut union = TagSet::new();
    for set in sets {
        union.extend_from(set);
    }
    for tag in union.iter() {
        let mut mask = 0u8;
        for (i, set) in sets.iter().enumerate() {
            if set.contains(tag) {
                mask |= 1 << i;
            }
        }
        regions
            .get_mut(&RegionSignature::new(mask, count as u8))
            .expect("all masks preinserted")
            .insert(tag);
    }
    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(labels: &[&str]) -> TagSet {
        labels.iter().copied().collect()
    }

    fn region<'a>(regions: &'a BTreeMap<RegionSignature, TagSet>, label: &str) -> &'a TagSet {
        regions
            .iter()
            .find(|(sig, _)| sig.label() == label)
            .map(|(_, set)| set)
            .unwrap_or_else(|| panic!("region {label} missing"))
    }

    #[test]
    fn identical_sets_fill_only_the_intersection() {
        let a = tags(&["x", "y"]);
        let regions = venn_regions(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(regions.len(), 3);
        assert!(region(&regions, "A").is_empty());
        assert!(region(&regions, "B").is_empty());
        assert_eq!(region(&regions, "AB"), &a);
    }

    #[test]
    fn disjoint_sets_fill_only_exclusive_regions() {
        let regions = venn_regions(&[tags(&["x"]), tags(&["y"])]).unwrap();
        assert_eq!(region(&regions, "A"), &tags(&["x"]));
        assert_eq!(region(&regions, "B"), &tags(&["y"]));
        assert!(region(&regions, "AB").is_empty());
    }

    #[test]
    fn three_sets_have_seven_regions_partitioning_the_union() {
        let a = tags(&["1", "2", "3", "7"]);
        let b = tags(&["2", "4", "7"]);
        let c = tags(&["3", "4", "5", "7"]);
        let regions = venn_regions(&[a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(regions.len(), 7);
        assert_eq!(region(&regions, "A"), &tags(&["1"]));
        assert_eq!(region(&regions, "AB"), &tags(&["2"]));
        assert_eq!(region(&regions, "AC"), &tags(&["3"]));
        assert_eq!(region(&regions, "BC"), &tags(&["4"]));
        assert_eq!(region(&regions, "C"), &tags(&["5"]));
        assert_eq!(region(&regions, "ABC"), &tags(&["7"]));
        assert!(region(&regions, "B").is_empty());

        // Partition: sizes sum to the union, no tag in two regions.
        let total: usize = regions.values().map(TagSet::len).sum();
        let union = a.union(&b).union(&c);
        assert_eq!(total, union.len());
    }

    #[test]
    fn unsupported_set_counts_rejected() {
        assert!(venn_regions(&[tags(&["x"])]).is_err());
        let four: Vec<TagSet> = (0..4).map(|_| tags(&["x"])).collect();
        assert!(venn_regions(&four).is_err());
    }

    #[test]
    fn random_sets_match_per_tag_membership_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let pool: Vec<String> = (0..rng.gen_range(1..=50))
                .map(|i| format!("t{i}"))
                .collect();
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> TagSet {
                pool.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect()
            };
            let sets = [draw(&mut rng), draw(&mut rng), draw(&mut rng)];
            let regions = venn_regions(&sets).unwrap();

            for tag in &pool {
                let memberships: Vec<bool> = sets.iter().map(|s| s.contains(tag)).collect();
                let in_any = memberships.iter().any(|&m| m);
                let holding: Vec<&RegionSignature> = regions
                    .iter()
                    .filter(|(_, set)| set.contains(tag))
                    .map(|(sig, _)| sig)
                    .collect();
                if !in_any {
                    assert!(holding.is_empty());
                    continue;
                }
                assert_eq!(holding.len(), 1, "tag {tag} in {} regions", holding.len());
                let sig = holding[0];
                for (i, &member) in memberships.iter().enumerate() {
                    assert_eq!(sig.contains(i), member);
                }
            }
        }
    }

    #[test]
    fn signature_string_round_trip() {
        let sig = RegionSignature::new(0b101, 3);
        assert_eq!(sig.label(), "AC");
        let back = RegionSignature::try_from("AC".to_string()).unwrap();
        assert_eq!(back.label(), "AC");
        assert!(back.contains(0));
        assert!(!back.contains(1));
        assert!(back.contains(2));
    }
}
