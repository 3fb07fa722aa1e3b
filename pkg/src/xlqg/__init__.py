"""Cross-lingual question generation with type-matched question exemplars.

Train a question-type classifier and an exemplar-conditioned question
generator on English QA data only, then generate questions in other languages
by showing the generator a handful of type-matched questions written in the
target language at inference time.
"""

__version__ = "0.1.0"
