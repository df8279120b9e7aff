"""News timeline summarization: build date-organized extractive summaries
from article collections, by date-wise scoring or article clustering, and
evaluate them against reference timelines."""

__version__ = "0.1.0"

from .corpus import Article, Sentence, Task, Timeline  # noqa: F401
from .evaluate import MethodConfig, build_for_task, evaluate_timeline, loocv  # noqa: F401
