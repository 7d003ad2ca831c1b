import json
import os


DEFAULT_CONFIG = {
    "RETRIEVER": "tavily",
    "FAST_LLM": "openai:gpt-4o-mini",
    "SMART_LLM": "openai:gpt-4o",
    "TEMPERATURE": 0.4,
    "MAX_TOKENS": 4000,
    "TOTAL_WORDS": 1000,
    "REPORT_FORMAT": "APA",
    "LANGUAGE": "english",
}


class Config:
    """Runtime settings merged from defaults, an optional JSON file and the environment."""

    def __init__(self, config_path=None):
        settings = dict(DEFAULT_CONFIG)
        if config_path:
            with open(config_path) as fh:
                settings.update(json.load(fh))
        for key in settings:
            if key in os.environ:
                settings[key] = os.environ[key]

        self.retriever = settings["RETRIEVER"]
        self.fast_llm_provider, self.fast_llm_model = self.parse_llm(settings["FAST_LLM"])
        self.smart_llm_provider, self.smart_llm_model = self.parse_llm(settings["SMART_LLM"])
        self.temperature = float(settings["TEMPERATURE"])
        self.max_tokens = int(settings["MAX_TOKENS"])
        self.total_words = int(settings["TOTAL_WORDS"])
        self.report_format = settings["REPORT_FORMAT"]
        self.language = settings["LANGUAGE"]
        self.api_key = os.getenv("OPENAI_API_KEY")

    @staticmethod
    def parse_llm(spec):
        provider, _, model_name = spec.partition(":")
        if not model_name:
            raise ValueError(f"expected provider:model, got {spec!r}")
        return provider, model_name

    def llm_kwargs(self):
        return {"temperature": self.temperature, "max_tokens": self.max_tokens, "api_key": self.api_key}
