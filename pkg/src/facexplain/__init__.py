"""Explainable face verification.

Compare two face images, explain the similarity decision with black-box
occlusion saliency condensed into a facial-region importance table,
calibrate the decision confidence against genuine/impostor score
distributions, and answer questions about the result through an
extractive-QA chat layer.  An HTTP service and a CLI wrap the library.
"""

from .alignment import CANONICAL_TEMPLATE, canonical_template_json, estimate_similarity
from .backends import (
    DownsampleEmbedder,
    TemplateDetector,
    get_detector,
    get_embedder,
    register_detector,
    register_embedder,
)
from .calibration import (
    CalibrationSet,
    DetPoint,
    PicModel,
    compute_det,
    eer,
    fit_pic,
    fnmr_at_fmr,
    load_calibration_csv,
    pic_confidence,
)
from .config import ServiceConfig, load_config
from .context import GeneralContextInfo, QAContext, build_context, split_sentences
from .errors import FaceXplainError
from .evaluation import QuestionSuite, load_builtin_suite, run_fr_eval, run_qa_suite
from .pipeline import Runtime, explain_verified_pair
from .qa import (
    AnswerResult,
    HashedBowEmbedder,
    KeywordSpanExtractor,
    answer,
    ask_question,
    canned_faq,
    select_subcontext,
)
from .regions import (
    ExplainabilityTable,
    FacialRegion,
    build_table,
    quantize_region,
    rank_regions,
    region_masks,
)
from .saliency import (
    OcclusionGrid,
    SaliencyMap,
    SaliencyMethod,
    average_map,
    explain_pair,
    greedy_aggregation,
    greedy_removal,
    single_aggregation,
    single_removal,
)
from .verification import (
    AlignedFace,
    Embedding,
    FaceImage,
    Landmarks5,
    VerificationRecord,
    cosine_similarity,
    decide,
    detect_and_align,
    embed,
    verify_pair,
)

__version__ = "0.1.0"
