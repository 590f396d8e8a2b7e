//! Fixed-length padding/truncation for sequence models.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Padded {
    pub ids: Vec<usize>,
    /// 1 for real positions, 0 for padding.
    pub mask: Vec<u8>,
    pub truncated: bool,
}

/// Right-pad with `pad_id` to `target`, or truncate past it.
pub fn pad_truncate(ids: &[usize], target: usize, pad_id: usize) -> Padded {
    assert!(target >= 1, "pad target must be positive");
    if ids.len() >= target {
        Padded {
            ids: ids[..target].to_vec(),
            mask: vec![1; target],
            truncated: ids.len() > target,
        }
    } else {
        let mut out = ids.to_vec();
        let mut mask = vec![1u8; ids.len()];
        out.resize(target, pad_id);
        mask.resize(target, 0);
        Padded {
            ids: out,
            mask,
            truncated: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorter_sequences_are_right_padded() {
        let p = pad_truncate(&[5, 6, 7, 8, 9], 8, 0);
        assert_eq!(p.ids, vec![5, 6, 7, 8, 9, 0, 0, 0]);
        assert_eq!(p.mask, vec![1, 1, 1, 1, 1, 0, 0, 0]);
        assert!(!p.truncated);
    }

    #[test]
    fn exact_length_is_unchanged() {
        let ids: Vec<usize> = (0..3000).collect();
        let p = pad_truncate(&ids, 3000, 0);
        assert_eq!(p.ids, ids);
        assert!(!p.truncated);
    }

    #[test]
    fn longer_sequences_are_truncated_with_a_flag() {
        let ids: Vec<usize> = (0..3500).collect();
        let p = pad_truncate(&ids, 3000, 0);
        assert_eq!(p.ids.len(), 3000);
        assert!(p.truncated);
    }
}
