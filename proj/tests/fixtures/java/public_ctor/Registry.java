package demo;

import java.util.List;
import java.util.ArrayList;

public class Registry {
    private static final Registry SHARED = new Registry();
    private final List<String> names = new ArrayList<>();

    public Registry() {
    }

    public static Registry get() {
        return SHARED;
    }

    public void add(String name) {
        names.add(name);
    }
}
