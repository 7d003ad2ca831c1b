import tomllib
from pathlib import Path

from llama_index.core import Settings
from llama_index.embeddings.openai import OpenAIEmbedding
from llama_index.llms.openai import OpenAI

PYPROJECT = Path(__file__).resolve().parent.parent / "pyproject.toml"


def load_rag_settings(path=PYPROJECT):
    with open(path, "rb") as fh:
        return tomllib.load(fh)["tool"]["ragapp"]


def configure(model_name="gpt-4o-mini", temperature=0.1):
    rag = load_rag_settings()
    Settings.llm = OpenAI(model=model_name, temperature=temperature)
    Settings.embed_model = OpenAIEmbedding(model=rag["embed_model"], dimensions=rag["embed_dim"])
    Settings.chunk_size = rag["chunk_size"]
    return rag
