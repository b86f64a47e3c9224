"""adrisk: batch pipeline for flagging trafficking-at-risk job ads.

Labels job advertisements by cross-domain phone-number reuse, trains an
ensemble of classifiers over precomputed text embeddings, and produces
geographic / industry / gender / contact-method characterization
reports.
"""

__version__ = "0.1.0"
