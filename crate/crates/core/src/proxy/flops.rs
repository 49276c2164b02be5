//! Compute-cost approximations.

/// Published rating costs, in units of 1e19 FLOPs.
pub const RATING_FLOPS_E19: [(&str, f64); 5] = [
    ("Fineweb-edu Classifier", 0.44),
    ("WanjuanCC Classifiers (2)", 0.88),
    ("QuRating Classifiers (4)", 6.18),
    ("PRRC Classifiers (4)", 25.52),
    ("Proxy Models Training and Inference", 0.18),
];

/// `6 · params · tokens`.
pub fn flops_train(params: f64, tokens: f64) -> f64 {
    6.0 * params * tokens
}

/// `6 · L · H² · T · |D| · E`.
pub fn flops_train_structural(layers: f64, hidden: f64, tokens_per_sample: f64, samples: f64, epochs: f64) -> f64 {
    6.0 * layers * hidden * hidden * tokens_per_sample * samples * epochs
}

/// `2 · L · H² · T · |D|`.
pub fn flops_infer_structural(layers: f64, hidden: f64, tokens_per_sample: f64, samples: f64) -> f64 {
    2.0 * layers * hidden * hidden * tokens_per_sample * samples
}
