import json

from .actions.web_search import gather_context
from .config.config import Config
from .llm_provider.generic import create_chat_completion
from .prompts import build_report_prompt, generate_search_queries_prompt
from .utils.logger import get_logger

logger = get_logger(__name__)


class GPTResearcher:
    def __init__(self, query, report_type="research_report", config_path=None, parent_query=""):
        self.query = query
        self.report_type = report_type
        self.parent_query = parent_query
        self.cfg = Config(config_path)
        self.context = ""

    async def plan_queries(self):
        prompt = generate_search_queries_prompt(self.query, self.parent_query)
        messages = [{"role": "user", "content": prompt}]
        reply = await create_chat_completion(messages, model=self.cfg.fast_llm_model, temperature=0,
                                             max_tokens=self.cfg.max_tokens, llm_provider=self.cfg.fast_llm_provider)
        return json.loads(reply)

    async def conduct_research(self):
        queries = await self.plan_queries()
        logger.info("running %d search queries", len(queries))
        self.context = await gather_context(queries, self.cfg.api_key)
        return self.context

    async def write_report(self, existing_headers=None):
        kwargs = {
            "context": self.context,
            "report_format": self.cfg.report_format,
            "total_words": self.cfg.total_words,
            "language": self.cfg.language,
        }
        if self.report_type == "subtopic_report":
            kwargs.update(current_subtopic=self.query, existing_headers=existing_headers or [],
                          main_topic=self.parent_query)
        else:
            kwargs["question"] = self.query
        prompt = build_report_prompt(self.report_type, **kwargs)
        messages = [{"role": "system", "content": "You are a research assistant."},
                    {"role": "user", "content": prompt}]
        return await create_chat_completion(messages, model=self.cfg.smart_llm_model,
                                            temperature=self.cfg.temperature, max_tokens=self.cfg.max_tokens,
                                            llm_provider=self.cfg.smart_llm_provider)
