import chromadb
from chromadb.utils import embedding_functions


class MemoryStore:
    """Conversation memory backed by a persistent Chroma collection."""

    def __init__(self, collection, persist_path, top_k=4):
        self.client = chromadb.PersistentClient(path=persist_path)
        self.embed = embedding_functions.DefaultEmbeddingFunction()
        self.collection = self.client.get_or_create_collection(collection, embedding_function=self.embed)
        self.top_k = top_k
        self.chat_history = []

    def remember(self, turn_id, text):
        self.chat_history.append(text)

    def recall(self, query):
        if self.collection.count() == 0:
            return []
        hits = self.collection.query(query_texts=[query], n_results=self.top_k)
        return hits["documents"][0]
