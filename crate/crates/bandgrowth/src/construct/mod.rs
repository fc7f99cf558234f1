//! Block structures `n_k = [k^t]`, the block-diagonal algebra and its banded
//! embedding, stretch embeddings into smaller growth classes, the default
//! eight-generator set, and word recipes for matrix units and cross elements.

pub mod embed;
pub mod generators;
pub mod interleave;
pub mod recipes;
pub mod stretch;
pub mod structure;
pub mod words;

pub use embed::{embed_r, BlockElement};
pub use generators::{default_generators, Gen, GeneratorGrowth, GeneratorSet};
pub use interleave::{interleave_combine, interleave_slot, SlotImage};
pub use recipes::{
    address_word, block_start_combination, cross_element, idempotent_family, matrix_unit_recipe,
    recipe_structure, recommended_window, CrossElement, IdempotentFamily, MatrixUnitRecipe,
    RecipeBook,
};
pub use stretch::{stretch_embed, StretchEmbedding};
pub use structure::{parse_frac, BlockStructure, Frac};
pub use words::{Combination, EvalCache, Word};
