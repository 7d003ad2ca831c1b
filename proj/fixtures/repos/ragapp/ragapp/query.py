from ragapp.index.vector_index import build_index
from ragapp.settings import configure

QA_PROMPT = (
    "Context information is below.\n{context_str}\n"
    "Given the context and no prior knowledge, answer the query.\nQuery: {query_str}\nAnswer: "
)


def answer(question, data_dir="data"):
    configure()
    index = build_index(data_dir)
    engine = index.as_query_engine(similarity_top_k=3)
    return str(engine.query(question))
