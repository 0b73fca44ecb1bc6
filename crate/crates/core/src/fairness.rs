//! Balanced accuracy and group fairness metrics over a batch of predictions.
//!
//! Sign conventions are fixed by the `(focal, reference)` pair: statistical
//! parity and equalized odds are `focal - reference`, disparate impact is
//! `focal / reference`.

use crate::error::{Error, Result};
use crate::scalar::{ratio, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionBatch {
    y_true: Vec<u8>,
    y_pred: Vec<u8>,
    group: Vec<usize>,
}

/// Counts for one group: `[y][y_hat]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Confusion([[usize; 2]; 2]);

impl Confusion {
    fn n(&self) -> usize {
        self.0[0][0] + self.0[0][1] + self.0[1][0] + self.0[1][1]
    }
    fn positives(&self) -> usize {
        self.0[1][0] + self.0[1][1]
    }
    fn negatives(&self) -> usize {
        self.0[0][0] + self.0[0][1]
    }
    fn predicted_positive(&self) -> usize {
        self.0[0][1] + self.0[1][1]
    }
}

impl PredictionBatch {
    pub fn new(y_true: Vec<u8>, y_pred: Vec<u8>, group: Vec<usize>) -> Result<Self> {
        if y_true.len() != y_pred.len() || y_true.len() != group.len() {
            return Err(Error::InvalidBatch(format!(
                "lengths differ: y_true {}, y_pred {}, group {}",
                y_true.len(),
                y_pred.len(),
                group.len()
            )));
        }
        if y_true.iter().chain(&y_pred).any(|&v| v > 1) {
            return Err(Error::InvalidBatch("labels must be 0 or 1".into()));
        }
        Ok(Self {
            y_true,
            y_pred,
            group,
        })
    }

    pub fn len(&self) -> usize {
        self.y_true.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_true.is_empty()
    }

    pub fn y_true(&self) -> &[u8] {
        &self.y_true
    }

    pub fn y_pred(&self) -> &[u8] {
        &self.y_pred
    }

    pub fn group(&self) -> &[usize] {
        &self.group
    }

    fn confusion(&self, group: Option<usize>) -> Confusion {
        let mut c = Confusion::default();
        for i in 0..self.len() {
            if group.is_none_or(|g| self.group[i] == g) {
                c.0[self.y_true[i] as usize][self.y_pred[i] as usize] += 1;
            }
        }
        c
    }

    fn group_confusion(&self, group: usize) -> Result<Confusion> {
        let c = self.confusion(Some(group));
        if c.n() == 0 {
            return Err(Error::EmptyGroup(group));
        }
        Ok(c)
    }
}

/// `(TPR + TNR) / 2` over the pooled confusion matrix.
pub fn balanced_accuracy<T: Real>(b: &PredictionBatch) -> Result<T> {
    let c = b.confusion(None);
    if c.positives() == 0 || c.negatives() == 0 {
        return Err(Error::SingleClass);
    }
    let tpr: T = ratio(c.0[1][1], c.positives());
    let tnr: T = ratio(c.0[0][0], c.negatives());
    Ok((tpr + tnr) / T::lit(2.0))
}

/// `P(y_hat = 1 | focal) - P(y_hat = 1 | reference)`.
pub fn statistical_parity<T: Real>(b: &PredictionBatch, focal: usize, reference: usize) -> Result<T> {
    let f = b.group_confusion(focal)?;
    let r = b.group_confusion(reference)?;
    Ok(ratio::<T>(f.predicted_positive(), f.n()) - ratio::<T>(r.predicted_positive(), r.n()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisparateImpact<T> {
    Ratio(T),
    /// Neither group received a positive prediction; counts as 1.
    BothZero,
    /// Only the reference group has a zero positive rate.
    Undefined,
}

impl<T: Real> DisparateImpact<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            DisparateImpact::Ratio(v) => Some(*v),
            DisparateImpact::BothZero => Some(T::one()),
            DisparateImpact::Undefined => None,
        }
    }
}

/// `P(y_hat = 1 | focal) / P(y_hat = 1 | reference)`.
pub fn disparate_impact<T: Real>(
    b: &PredictionBatch,
    focal: usize,
    reference: usize,
) -> Result<DisparateImpact<T>> {
    let f = b.group_confusion(focal)?;
    let r = b.group_confusion(reference)?;
    Ok(match (f.predicted_positive(), r.predicted_positive()) {
        (0, 0) => DisparateImpact::BothZero,
        (_, 0) => DisparateImpact::Undefined,
        (fp, rp) => DisparateImpact::Ratio(ratio::<T>(fp, f.n()) / ratio::<T>(rp, r.n())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualizedOdds<T> {
    pub value: T,
    /// Some `(group, class)` stratum had no rows; its gap counted as 0.
    pub empty_stratum: bool,
}

/// `((TPR_f - TPR_r) + (FPR_f - FPR_r)) / 2`.
pub fn equalized_odds<T: Real>(
    b: &PredictionBatch,
    focal: usize,
    reference: usize,
) -> Result<EqualizedOdds<T>> {
    let f = b.group_confusion(focal)?;
    let r = b.group_confusion(reference)?;
    let mut empty_stratum = false;
    let mut gap = |class: usize| {
        let (fn_, rn) = (f.0[class][0] + f.0[class][1], r.0[class][0] + r.0[class][1]);
        if fn_ == 0 || rn == 0 {
            empty_stratum = true;
            T::zero()
        } else {
            ratio::<T>(f.0[class][1], fn_) - ratio::<T>(r.0[class][1], rn)
        }
    };
    let tpr_gap = gap(1);
    let fpr_gap = gap(0);
    Ok(EqualizedOdds {
        value: (tpr_gap + fpr_gap) / T::lit(2.0),
        empty_stratum,
    })
}

/// `w_acc * bacc + w_fair * max(0, 1 - |1 - di|)`; undefined DI scores 0.
pub fn combined_metric<T: Real>(bacc: T, di: Option<T>, w_acc: T, w_fair: T) -> T {
    let fairness = di.map_or(T::zero(), |d| (T::one() - (T::one() - d).abs()).max(T::zero()));
    w_acc * bacc + w_fair * fairness
}

/// Group-conditional rates; `None` where the conditioning stratum is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates<T> {
    pub group: usize,
    pub n: usize,
    pub positive_rate: T,
    pub tpr: Option<T>,
    pub tnr: Option<T>,
    pub fpr: Option<T>,
}

impl<T: Real> GroupRates<T> {
    fn from_confusion(group: usize, c: &Confusion) -> Self {
        let rate = |num: usize, den: usize| (den > 0).then(|| ratio::<T>(num, den));
        Self {
            group,
            n: c.n(),
            positive_rate: ratio(c.predicted_positive(), c.n()),
            tpr: rate(c.0[1][1], c.positives()),
            tnr: rate(c.0[0][0], c.negatives()),
            fpr: rate(c.0[0][1], c.negatives()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport<T> {
    pub bacc: T,
    pub tpr: T,
    pub tnr: T,
    pub sp: T,
    pub di: DisparateImpact<T>,
    pub eqo: T,
    pub eqo_empty_stratum: bool,
    pub focal: GroupRates<T>,
    pub reference: GroupRates<T>,
}

impl<T: Real> FairnessReport<T> {
    pub fn evaluate(b: &PredictionBatch, focal: usize, reference: usize) -> Result<Self> {
        let bacc = balanced_accuracy(b)?;
        let all = b.confusion(None);
        let eqo = equalized_odds(b, focal, reference)?;
        Ok(Self {
            bacc,
            tpr: ratio(all.0[1][1], all.positives()),
            tnr: ratio(all.0[0][0], all.negatives()),
            sp: statistical_parity(b, focal, reference)?,
            di: disparate_impact(b, focal, reference)?,
            eqo: eqo.value,
            eqo_empty_stratum: eqo.empty_stratum,
            focal: GroupRates::from_confusion(focal, &b.group_confusion(focal)?),
            reference: GroupRates::from_confusion(reference, &b.group_confusion(reference)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd<T> {
    pub mean: T,
    /// Population standard deviation.
    pub std: T,
}

impl<T: Real> MeanStd<T> {
    pub fn of(values: &[T]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = T::count(values.len());
        let mean = values.iter().copied().sum::<T>() / n;
        let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedReport<T> {
    pub n_reports: usize,
    pub bacc: MeanStd<T>,
    pub sp: MeanStd<T>,
    pub eqo: MeanStd<T>,
    /// `None` when every report had an undefined DI.
    pub di: Option<MeanStd<T>>,
    pub di_excluded: usize,
}

pub fn aggregate_reports<T: Real>(reports: &[FairnessReport<T>]) -> Result<AggregatedReport<T>> {
    if reports.is_empty() {
        return Err(Error::EmptyList);
    }
    let col = |f: fn(&FairnessReport<T>) -> T| -> Vec<T> { reports.iter().map(f).collect() };
    let di: Vec<T> = reports.iter().filter_map(|r| r.di.value()).collect();
    Ok(AggregatedReport {
        n_reports: reports.len(),
        bacc: MeanStd::of(&col(|r| r.bacc)).expect("non-empty"),
        sp: MeanStd::of(&col(|r| r.sp)).expect("non-empty"),
        eqo: MeanStd::of(&col(|r| r.eqo)).expect("non-empty"),
        di_excluded: reports.len() - di.len(),
        di: MeanStd::of(&di),
    })
}
