use std::collections::BTreeMap;

use super::{DatasetError, DatasetManifest, EmotionLabel, Rng};

/// Stratified split over record indices.
///
/// Each class is shuffled with `rng` (classes visited in code order) and the
/// first `ceil(fraction * count)` go to training, always leaving at least
/// one record for testing. Both index lists come back in ascending order.
pub fn split_indices(
    labels: &[EmotionLabel],
    fraction: f64,
    rng: &mut Rng,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DatasetError::InvalidArgument(format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let mut by_class: BTreeMap<EmotionLabel, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((&label, v)) = by_class.iter().find(|(_, v)| v.len() < 2) {
        return Err(DatasetError::Split { label, count: v.len() });
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for idx in by_class.values_mut() {
        rng.shuffle(idx);
        let count = idx.len();
        // The epsilon keeps 0.8 * 10 from rounding up to 9.
        let n_train = ((fraction * count as f64) - 1e-9).ceil().clamp(1.0, (count - 1) as f64) as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(
    manifest: &DatasetManifest,
    fraction: f64,
    rng: &mut Rng,
) -> Result<(DatasetManifest, DatasetManifest), DatasetError> {
    let (train, test) = split_indices(&manifest.labels(), fraction, rng)?;
    Ok((manifest.select(&train), manifest.select(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SampleRecord;
    use proptest::prelude::*;
    use crate::dataset::Rng;

    fn manifest(per_class: &[(EmotionLabel, usize)]) -> DatasetManifest {
        let mut recs = Vec::new();
        for &(label, n) in per_class {
            for k in 0..n {
                recs.push(SampleRecord {
                    image_path: format!("{}_{k}.pgm", label.name()).into(),
                    label,
                    subject: format!("S{k:03}"),
                    session: "001".into(),
                });
            }
        }
        DatasetManifest::new(48, 48, recs)
    }

    fn count(m: &DatasetManifest, l: EmotionLabel) -> usize {
        m.records.iter().filter(|r| r.label == l).count()
    }

    #[test]
    fn eighty_twenty_per_class() {
        let m = manifest(&[(EmotionLabel::Happy, 10), (EmotionLabel::Sad, 10), (EmotionLabel::Fear, 10)]);
        let (train, test) = split(&m, 0.8, &mut Rng::new(42)).unwrap();
        for l in [EmotionLabel::Happy, EmotionLabel::Sad, EmotionLabel::Fear] {
            assert_eq!((count(&train, l), count(&test, l)), (8, 2));
        }
    }

    #[test]
    fn same_seed_same_partition() {
        let m = manifest(&[(EmotionLabel::Happy, 7), (EmotionLabel::Anger, 5)]);
        let a = split(&m, 0.8, &mut Rng::new(3)).unwrap();
        let b = split(&m, 0.8, &mut Rng::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keeps_one_test_record() {
        let m = manifest(&[(EmotionLabel::Contempt, 2)]);
        let (train, test) = split(&m, 0.99, &mut Rng::new(0)).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
    }

    #[test]
    fn errors() {
        let m = manifest(&[(EmotionLabel::Happy, 4), (EmotionLabel::Fear, 1)]);
        let err = split(&m, 0.8, &mut Rng::new(0)).unwrap_err();
        assert!(matches!(err, DatasetError::Split { label: EmotionLabel::Fear, count: 1 }));
        assert!(err.to_string().contains("fear"));
        let ok = manifest(&[(EmotionLabel::Happy, 4)]);
        for f in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(split(&ok, f, &mut Rng::new(0)).is_err());
        }
    }

    proptest! {
        #[test]
        fn partitions(sizes in proptest::collection::vec(2usize..15, 1..6), fraction in 0.05f64..0.95, seed: u64) {
            let spec: Vec<_> = sizes.iter().enumerate().map(|(i, &n)| (EmotionLabel::ALL[i], n)).collect();
            let m = manifest(&spec);
            let (train, test) = split_indices(&m.labels(), fraction, &mut Rng::new(seed)).unwrap();
            prop_assert_eq!(train.len() + test.len(), m.len());
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), m.len());
            for &(l, _) in &spec {
                prop_assert!(test.iter().any(|&i| m.records[i].label == l));
                prop_assert!(train.iter().any(|&i| m.records[i].label == l));
            }
        }
    }
}
