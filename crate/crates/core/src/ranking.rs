//! Scoring formulas shared by extraction, relation building and retrieval.

use crate::scalar::Scalar;

/// Additive prior in the co-occurrence strength rule `n / (n + prior)`.
pub const STRENGTH_PRIOR: u64 = 5;

/// Okapi BM25 with the `ln(1 + (D - df + 0.5) / (df + 0.5))` idf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25<T> {
    pub k1: T,
    pub b: T,
}

impl<T: Scalar> Default for Bm25<T> {
    fn default() -> Self {
        Self {
            k1: T::lit(1.2),
            b: T::lit(0.75),
        }
    }
}

impl<T: Scalar> Bm25<T> {
    pub fn new(k1: T, b: T) -> Self {
        Self { k1, b }
    }

    /// Inverse document frequency; always positive for `df <= n_docs`.
    pub fn idf(&self, df: u64, n_docs: u64) -> T {
        let half = T::lit(0.5);
        let df = T::from_count(df);
        let n = T::from_count(n_docs);
        ((n - df + half) / (df + half) + T::one()).ln()
    }

    /// Contribution of one query term to one document.
    pub fn term_score(&self, tf: u64, doc_len: u64, avg_doc_len: T, idf: T) -> T {
        if tf == 0 {
            return T::zero();
        }
        let tf = T::from_count(tf);
        let len_ratio = if avg_doc_len > T::zero() {
            T::from_count(doc_len) / avg_doc_len
        } else {
            T::one()
        };
        let norm = self.k1 * (T::one() - self.b + self.b * len_ratio);
        idf * (tf * (self.k1 + T::one())) / (tf + norm)
    }
}

/// Relation weight derived from `n` co-occurring sentences.
pub fn relation_strength<T: Scalar>(evidence: u64) -> T {
    let n = T::from_count(evidence);
    n / (n + T::from_count(STRENGTH_PRIOR))
}

/// Saturating document association of a concept occurring `tf` times.
pub fn concept_association<T: Scalar>(tf: u64) -> T {
    let tf = T::from_count(tf);
    tf / (tf + T::one())
}

/// Correspondence weight of a candidate term:
/// `(df / D) * (lambda + (1 - lambda) * cooc / max(1, approved))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateWeighting<T> {
    pub lambda: T,
}

impl<T: Scalar> Default for CandidateWeighting<T> {
    fn default() -> Self {
        Self { lambda: T::lit(0.5) }
    }
}

impl<T: Scalar> CandidateWeighting<T> {
    pub fn new(lambda: T) -> Self {
        Self { lambda }
    }

    pub fn weight(&self, df: u64, n_docs: u64, cooccurring: u64, approved: u64) -> T {
        if n_docs == 0 {
            return T::zero();
        }
        let doc_share = T::from_count(df.min(n_docs)) / T::from_count(n_docs);
        let cooc = T::from_count(cooccurring.min(approved.max(1))) / T::from_count(approved.max(1));
        let blend = self.lambda + (T::one() - self.lambda) * cooc;
        (doc_share * blend).max(T::zero()).min(T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bm25_two_document_fixture() {
        // D=2, d1 = [copd, copd, treatment], d2 = [kidney, disease], avgdl = 2.5
        let bm25 = Bm25::<f64>::default();
        let idf = bm25.idf(1, 2);
        assert!((idf - 2f64.ln()).abs() < 1e-15);
        let s = bm25.term_score(2, 3, 2.5, idf);
        let hand = 2f64.ln() * 4.4 / 3.38;
        assert!((s - hand).abs() < 1e-12);
        assert!((s - 0.9023).abs() < 1e-3);
    }

    #[test]
    fn strength_rule_values() {
        assert!((relation_strength::<f64>(5) - 0.5).abs() < 1e-15);
        assert!((relation_strength::<f64>(10) - 10.0 / 15.0).abs() < 1e-15);
        assert_eq!(relation_strength::<f64>(0), 0.0);
    }

    #[test]
    fn association_saturates() {
        assert_eq!(concept_association::<f64>(3), 0.75);
        assert_eq!(concept_association::<f64>(1), 0.5);
    }

    #[test]
    fn candidate_weight_examples() {
        let w = CandidateWeighting::<f64>::default();
        assert!((w.weight(4, 10, 2, 5) - 0.28).abs() < 1e-12);
        assert!((w.weight(4, 10, 0, 0) - 0.2).abs() < 1e-12);
        assert!((w.weight(10, 10, 5, 5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let w = CandidateWeighting::<f32>::default();
        assert!((w.weight(4, 10, 2, 5) - 0.28).abs() < 1e-6);
        let bm25 = Bm25::<f32>::default();
        let s = bm25.term_score(2, 3, 2.5, bm25.idf(1, 2));
        assert!((s - 0.9023).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn candidate_weight_bounded_and_monotone(
            n_docs in 1u64..200,
            df_a in 0u64..200,
            df_b in 0u64..200,
            approved in 0u64..40,
            c_a in 0u64..40,
            c_b in 0u64..40,
        ) {
            let w = CandidateWeighting::<f64>::default();
            let (df_lo, df_hi) = (df_a.min(df_b).min(n_docs), df_a.max(df_b).min(n_docs));
            let (c_lo, c_hi) = (c_a.min(c_b).min(approved), c_a.max(c_b).min(approved));
            let lo = w.weight(df_lo, n_docs, c_lo, approved);
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(w.weight(df_hi, n_docs, c_lo, approved) >= lo);
            prop_assert!(w.weight(df_lo, n_docs, c_hi, approved) >= lo);
        }

        #[test]
        fn bm25_strictly_monotone_in_tf(
            tf in 1u64..50,
            len in 50u64..100,
            df in 1u64..10,
            n_docs in 10u64..100,
        ) {
            let bm25 = Bm25::<f64>::default();
            let idf = bm25.idf(df, n_docs);
            let avg = 60.0;
            prop_assert!(bm25.term_score(tf + 1, len, avg, idf) > bm25.term_score(tf, len, avg, idf));
        }
    }
}
