from .evaluator import ScenarioEvaluator, write_csv, write_json
from .envelope_evaluation import EnvelopeEvaluator
from .mechanism_evaluation import ScreeningEvaluator, SynthesisEvaluator
from .information_evaluation import BlackwellEvaluator, InfoMarketEvaluator
