use ndarray::Array2;
use rand::Rng;

use super::config::TrainConfig;
use crate::edge_gen::EdgeGenerator;
use crate::error::Result;
use crate::nn::{
    Activation, GnnLayer, LayerConfig, NormalizedAdjacency, ParamId, ParamSet, Tape, Var,
};

/// Encoder block, classifier block with linear head, and edge generator.
///
/// Parameters are created in that order so that every variant draws the same
/// initial weights from a given seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub encoder: GnnLayer,
    pub classifier: GnnLayer,
    pub head_weight: ParamId,
    pub head_bias: ParamId,
    pub edge_generator: EdgeGenerator,
}

impl Model {
    pub fn new<R: Rng + ?Sized>(
        config: &TrainConfig,
        feature_dim: usize,
        num_classes: usize,
        params: &mut ParamSet,
        rng: &mut R,
    ) -> Result<Self> {
        let h = config.hidden_dim;
        let layer = |in_dim| LayerConfig {
            kind: config.base_model,
            in_dim,
            out_dim: h,
            activation: Activation::Relu,
        };
        let encoder = GnnLayer::new(layer(feature_dim), params, "encoder", rng)?;
        let classifier = GnnLayer::new(layer(h), params, "classifier", rng)?;
        let head_weight = params.add_glorot("head.weight", h, num_classes, rng);
        let head_bias = params.add("head.bias", Array2::zeros((1, num_classes)));
        let edge_generator = EdgeGenerator::new(h, config.score_activation, params, rng);
        Ok(Self {
            encoder,
            classifier,
            head_weight,
            head_bias,
            edge_generator,
        })
    }

    /// Classifier block and head; returns `(final hidden, logits)`.
    pub fn classify(
        &self,
        tape: &mut Tape,
        params: &ParamSet,
        adjacency: &NormalizedAdjacency,
        h: Var,
    ) -> (Var, Var) {
        let h2 = self.classifier.forward(tape, params, adjacency, h);
        let w = tape.param(params, self.head_weight);
        let b = tape.param(params, self.head_bias);
        let z = tape.matmul(h2, w);
        (h2, tape.add_row_bias(z, b))
    }
}
