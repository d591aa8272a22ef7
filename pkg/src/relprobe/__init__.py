"""relprobe: measure how much relational knowledge an embedding space encodes.

Pipeline: generate balanced relation-pair datasets from a knowledge graph,
train small neural probes on embedding pairs, and statistically classify
each (relation, space) pair as biased, not significant, or predictable.
"""

__version__ = "0.1.0"
