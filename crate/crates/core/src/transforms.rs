//! Model-to-model constructors (in progress).
