from .agent import GPTResearcher

__all__ = ["GPTResearcher"]
