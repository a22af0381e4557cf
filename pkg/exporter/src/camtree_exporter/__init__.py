"""Reference-model exporter for the camtree simulator."""

from .export import DATASETS, DEFAULT_DEPTHS, corpus_export, train_export, tree_to_document

__version__ = "0.1.0"
