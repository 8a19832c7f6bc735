//! Vowel-based dialect identification.
//!
//! Annotated recordings go in; a random-forest verdict on the speaker's
//! dialect comes out. See the guide in `book/` for a walk through each stage.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod audio;
pub mod eval;
pub mod features;
pub mod forest;
pub mod labels;
pub mod rng;
pub mod synth;
pub mod textgrid;

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/textgrid.md")]
    struct Annotations;
    #[doc = include_str!("../../../book/src/audio.md")]
    struct Audio;
    #[doc = include_str!("../../../book/src/acoustics.md")]
    struct Acoustics;
    #[doc = include_str!("../../../book/src/features.md")]
    struct Features;
    #[doc = include_str!("../../../book/src/synth.md")]
    struct Synth;
    #[doc = include_str!("../../../book/src/forest.md")]
    struct Forest;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    struct Evaluation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../book/src/model-format.md")]
    struct ModelFormat;
}
