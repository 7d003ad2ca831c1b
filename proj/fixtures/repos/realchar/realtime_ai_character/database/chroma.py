import os

from langchain.embeddings import OpenAIEmbeddings
from langchain.vectorstores import Chroma

embedding = OpenAIEmbeddings(openai_api_key=os.getenv("OPENAI_API_KEY"))


def get_chroma(persist_directory="./chroma.db"):
    return Chroma(collection_name="llm", embedding_function=embedding, persist_directory=persist_directory)
