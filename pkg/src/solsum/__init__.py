"""Call-tree-augmented prompt pipeline for Solidity code summarization."""

__version__ = "0.1.0"
