"""Python surface of the sequence-tagger compression toolkit.

The native module carries the main operations: CRF scoring/decoding,
temperature distillation losses, INT8 quantization kernels, the subword
tokenizer and strict span metrics.
"""

try:
    from slimtag._slimtag_core import *  # noqa: F401,F403  (installed layout)
    from slimtag._slimtag_core import __version__  # noqa: F401
except ImportError:  # build-tree layout: extension on PYTHONPATH
    from _slimtag_core import *  # noqa: F401,F403
    from _slimtag_core import __version__  # noqa: F401
