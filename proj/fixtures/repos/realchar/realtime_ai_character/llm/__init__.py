from .openai_llm import OpenaiLlm

__all__ = ["OpenaiLlm"]
